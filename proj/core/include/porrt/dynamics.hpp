#pragma once

#include <optional>
#include <vector>

#include "porrt/geometry.hpp"

namespace porrt {

/// Rigid planar object: convex footprint with uniform support pressure.
///
/// The footprint is given in the object frame, counter-clockwise. The
/// support friction coefficient only scales the magnitude of the frictional
/// load, so object motion depends on the footprint, the COM and the contact
/// friction coefficient alone.
class ObjectModel {
public:
    /// Validates convexity, orientation, COM containment and friction > 0.
    /// Throws ValidationError otherwise.
    ObjectModel(std::vector<Vec2> footprint, Vec2 com, double friction_mu = 0.5,
                double contact_mu = 0.3);

    /// Axis-aligned rectangle centred on the object-frame origin.
    static ObjectModel box(double width, double height, double friction_mu = 0.5,
                           double contact_mu = 0.3);

    const std::vector<Vec2>& footprint() const { return footprint_; }
    const Vec2& com() const { return com_; }
    double friction_mu() const { return friction_mu_; }
    double contact_mu() const { return contact_mu_; }

    /// Ratio of maximum friction moment to maximum friction force about the
    /// COM; the mean distance of the footprint from the COM.
    double limit_surface_radius() const { return limit_surface_radius_; }
    double area() const { return area_; }
    double min_edge_length() const { return min_edge_length_; }
    /// Largest vertex distance from the COM.
    double circumradius() const { return circumradius_; }

    /// max over vertices of (v - com) . dir, object frame.
    double support(const Vec2& dir) const;

private:
    std::vector<Vec2> footprint_;
    Vec2 com_;
    double friction_mu_;
    double contact_mu_;
    double limit_surface_radius_ = 0.0;
    double area_ = 0.0;
    double min_edge_length_ = 0.0;
    double circumradius_ = 0.0;
};

/// Footprint transformed by an object pose, with outward edge normals.
struct PosedFootprint {
    PosedFootprint(const ObjectModel& object, const Pose& pose);

    std::vector<Vec2> vertices;
    std::vector<Vec2> normals; ///< normals[i] belongs to edge vertices[i] -> vertices[i+1]
    Vec2 com;

    /// max_i n_i . (p - v_i): negative inside, zero on the boundary.
    double signed_distance_bound(const Vec2& p) const;
    /// Euclidean distance from an exterior point to the boundary (0 inside).
    double exterior_distance(const Vec2& p) const;
    /// Entry parameter t in [0, 1] of segment p0 -> p0 + delta, with entering edge index.
    std::optional<std::pair<double, int>> segment_entry(const Vec2& p0, const Vec2& delta) const;
};

struct WorldState {
    Pose object_pose;
    Vec2 finger_pos = Vec2::Zero();
    bool in_contact = false;
};

/// Finite-step defaults for pushes.
struct PushParams {
    double step_forward = 0.002; ///< finger advance per simulation step [m]
    double step_back = 0.05;     ///< retreat / clearance before a push [m]
    double contact_threshold = 0.001;
};

/// Single-contact straight-line push.
struct PushAction {
    Vec2 approach_point = Vec2::Zero();
    Vec2 direction = Vec2::UnitX();
    double travel = 0.0;
    double step_forward = PushParams{}.step_forward;
    double step_back = PushParams{}.step_back;
    double contact_threshold = PushParams{}.contact_threshold;

    /// Throws ValidationError on a non-unit direction or non-positive lengths.
    void validate() const;
    /// Number of simulation steps the push is divided into.
    int step_count() const;
    /// Finger arc length after `step` steps.
    double arc_length(int step) const;
    /// Same push cut after `steps` steps; replays bit-identically to the prefix.
    PushAction truncated(int steps) const;
};

struct ContactInfo {
    bool contact = false;
    double depth = 0.0;    ///< penetration depth, > 0 strictly inside
    double distance = 0.0; ///< distance to the boundary from outside
};

/// Per-step record of a simulated push.
struct ContactRecord {
    int step = 0;
    Vec2 finger_pos = Vec2::Zero();
    Pose object_pose;
    bool in_contact = false;
    bool sliding = false;
    double pushed = 0.0; ///< finger distance consumed by the object this step
};

struct PushResult {
    WorldState state;
    std::vector<ContactRecord> trace;
};

/// Optional early stop: end the push once the object is within `tolerance`
/// of `target` under the pose metric.
struct PushStop {
    Pose target;
    MetricWeights weights;
    double tolerance = 0.0;
};

ContactInfo detect_contact(const Vec2& finger_pos, const ObjectModel& object,
                           const Pose& object_pose,
                           double contact_threshold = PushParams{}.contact_threshold);

/// Incremental quasi-static push simulation.
///
/// The finger is placed at the action's approach point and advanced along
/// the push direction by `step_forward` per step. Whenever a step enters the
/// footprint, the consumed distance is mapped to an object twist through the
/// ellipsoidal limit surface with Coulomb friction at the contact, and the
/// finger is then projected back onto the displaced boundary.
class PushStepper {
public:
    /// Throws ConfigurationError when step_forward is not below the smallest
    /// footprint edge, ValidationError when the approach point is inside the object.
    PushStepper(const WorldState& start, const ObjectModel& object, const PushAction& action);

    bool done() const { return step_ >= total_steps_; }
    int steps_taken() const { return step_; }
    int total_steps() const { return total_steps_; }
    const WorldState& state() const { return state_; }

    /// Advances one step. Requires !done().
    ContactRecord step();

private:
    const ObjectModel* object_;
    PushAction action_;
    WorldState state_;
    int step_ = 0;
    int total_steps_ = 0;
};

PushResult simulate_push(const WorldState& state, const ObjectModel& object,
                         const PushAction& action, const std::optional<PushStop>& stop = {});

/// Straight-line push heuristic: push from behind the COM toward the target
/// COM position, starting `step_back` outside the footprint. Travel covers
/// the gap to first contact plus the COM-to-target distance.
/// Throws DegenerateDirectionError when the COM already sits on the target.
PushAction finger_line_action(const WorldState& from_state, const ObjectModel& object,
                              const Pose& target, const PushParams& params = {});

/// World-frame COM of `object` at `pose`.
Vec2 posed_com(const ObjectModel& object, const Pose& pose);

} // namespace porrt
