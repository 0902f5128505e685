#include "porrt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "porrt/errors.hpp"

namespace porrt {

namespace {

constexpr double kOnBoundary = 1e-12;
constexpr double kEdgeSlack = 1e-9;
constexpr int kQuadratureLevels = 3;

double cross2(const Vec2& a, const Vec2& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

Vec2 rotate(const Vec2& v, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Integral of |x| over triangle (a, b, c), 3-point Gauss rule on a uniform
// 4^levels subdivision.
double integrate_radius(const Vec2& a, const Vec2& b, const Vec2& c, int levels)
{
    if (levels > 0) {
        const Vec2 ab = 0.5 * (a + b);
        const Vec2 bc = 0.5 * (b + c);
        const Vec2 ca = 0.5 * (c + a);
        return integrate_radius(a, ab, ca, levels - 1) + integrate_radius(ab, b, bc, levels - 1) +
               integrate_radius(ca, bc, c, levels - 1) + integrate_radius(ab, bc, ca, levels - 1);
    }
    const double area = 0.5 * std::abs(cross2(b - a, c - a));
    const Vec2 g1 = (4.0 * a + b + c) / 6.0;
    const Vec2 g2 = (a + 4.0 * b + c) / 6.0;
    const Vec2 g3 = (a + b + 4.0 * c) / 6.0;
    return area / 3.0 * (g1.norm() + g2.norm() + g3.norm());
}

struct Twist {
    Vec2 linear = Vec2::Zero();
    double angular = 0.0;
    bool sliding = false;
};

// Object twist produced by a finger displacement `vp` at contact offset `r`
// (contact point minus COM) on an edge with outward normal `normal`.
Twist limit_surface_twist(const Vec2& r, const Vec2& vp, const Vec2& normal, double radius,
                          double contact_mu)
{
    const Vec2 inward = -normal;
    if (vp.dot(inward) <= 0.0) {
        return {};
    }
    const double c2 = radius * radius;
    const auto twist_from_force = [&](const Vec2& f) {
        return Twist{f, cross2(r, f) / c2, false};
    };
    const auto contact_velocity = [&](const Twist& t) {
        return Vec2(t.linear.x() - t.angular * r.y(), t.linear.y() + t.angular * r.x());
    };

    const Vec2 tangent(-inward.y(), inward.x());
    const Twist twist_left = twist_from_force(inward + contact_mu * tangent);
    const Twist twist_right = twist_from_force(inward - contact_mu * tangent);
    const Vec2 vl = contact_velocity(twist_left);
    const Vec2 vr = contact_velocity(twist_right);

    const double span = cross2(vr, vl);
    const double side_right = cross2(vr, vp);
    const double side_left = cross2(vp, vl);
    if (side_right * span >= 0.0 && side_left * span >= 0.0) {
        const double rx = r.x();
        const double ry = r.y();
        const double den = c2 + rx * rx + ry * ry;
        Twist t;
        t.linear.x() = ((c2 + rx * rx) * vp.x() + rx * ry * vp.y()) / den;
        t.linear.y() = (rx * ry * vp.x() + (c2 + ry * ry) * vp.y()) / den;
        t.angular = (rx * t.linear.y() - ry * t.linear.x()) / c2;
        return t;
    }

    // Sliding: the contact moves along the motion-cone edge nearest to vp.
    const bool beyond_right = side_right * span < 0.0;
    const Twist& edge = beyond_right ? twist_right : twist_left;
    const Vec2 vb = beyond_right ? vr : vl;
    const double scale = vp.dot(inward) / vb.dot(inward);
    return Twist{scale * edge.linear, scale * edge.angular, true};
}

} // namespace

ObjectModel::ObjectModel(std::vector<Vec2> footprint, Vec2 com, double friction_mu,
                         double contact_mu)
    : footprint_(std::move(footprint)), com_(std::move(com)), friction_mu_(friction_mu),
      contact_mu_(contact_mu)
{
    const std::size_t n = footprint_.size();
    if (n < 3) {
        throw ValidationError("object footprint needs at least 3 vertices");
    }
    if (!(friction_mu_ > 0.0) || !(contact_mu_ >= 0.0)) {
        throw ValidationError("friction coefficients must be positive");
    }
    min_edge_length_ = std::numeric_limits<double>::infinity();
    double twice_area = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = footprint_[i];
        const Vec2& b = footprint_[(i + 1) % n];
        const Vec2& c = footprint_[(i + 2) % n];
        if (cross2(b - a, c - b) <= 0.0) {
            throw ValidationError("object footprint must be strictly convex and counter-clockwise");
        }
        if (cross2(b - a, com_ - a) <= 0.0) {
            throw ValidationError("object COM must lie strictly inside the footprint");
        }
        min_edge_length_ = std::min(min_edge_length_, (b - a).norm());
        twice_area += cross2(a, b);
        circumradius_ = std::max(circumradius_, (a - com_).norm());
    }
    area_ = 0.5 * twice_area;

    double radius_integral = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        radius_integral += integrate_radius(Vec2::Zero(), footprint_[i] - com_,
                                            footprint_[(i + 1) % n] - com_, kQuadratureLevels);
    }
    limit_surface_radius_ = radius_integral / area_;
}

ObjectModel ObjectModel::box(double width, double height, double friction_mu, double contact_mu)
{
    const double hx = 0.5 * width;
    const double hy = 0.5 * height;
    return {{Vec2(-hx, -hy), Vec2(hx, -hy), Vec2(hx, hy), Vec2(-hx, hy)},
            Vec2::Zero(),
            friction_mu,
            contact_mu};
}

double ObjectModel::support(const Vec2& dir) const
{
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : footprint_) {
        best = std::max(best, (v - com_).dot(dir));
    }
    return best;
}

Vec2 posed_com(const ObjectModel& object, const Pose& pose)
{
    return pose.xy() + rotate(object.com(), pose.yaw());
}

PosedFootprint::PosedFootprint(const ObjectModel& object, const Pose& pose)
{
    const double yaw = pose.yaw();
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    const Vec2 t = pose.xy();
    const auto place = [&](const Vec2& v) {
        return Vec2(c * v.x() - s * v.y() + t.x(), s * v.x() + c * v.y() + t.y());
    };
    const auto& fp = object.footprint();
    vertices.reserve(fp.size());
    normals.reserve(fp.size());
    for (const Vec2& v : fp) {
        vertices.push_back(place(v));
    }
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec2 edge = vertices[(i + 1) % vertices.size()] - vertices[i];
        normals.emplace_back(Vec2(edge.y(), -edge.x()).normalized());
    }
    com = place(object.com());
}

double PosedFootprint::signed_distance_bound(const Vec2& p) const
{
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        best = std::max(best, normals[i].dot(p - vertices[i]));
    }
    return best;
}

double PosedFootprint::exterior_distance(const Vec2& p) const
{
    if (signed_distance_bound(p) <= 0.0) {
        return 0.0;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Vec2& a = vertices[i];
        const Vec2 ab = vertices[(i + 1) % vertices.size()] - a;
        const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        best = std::min(best, (p - (a + t * ab)).norm());
    }
    return best;
}

std::optional<std::pair<double, int>> PosedFootprint::segment_entry(const Vec2& p0,
                                                                    const Vec2& delta) const
{
    double t_in = -std::numeric_limits<double>::infinity();
    double t_out = std::numeric_limits<double>::infinity();
    int entering = -1;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const double num = normals[i].dot(vertices[i] - p0);
        const double den = normals[i].dot(delta);
        if (den == 0.0) {
            if (num < 0.0) {
                return std::nullopt;
            }
            continue;
        }
        const double t = num / den;
        if (den < 0.0) {
            if (t > t_in) {
                t_in = t;
                entering = static_cast<int>(i);
            }
        } else {
            t_out = std::min(t_out, t);
        }
    }
    if (entering < 0 || t_in < 0.0 || t_in > 1.0 || t_in > t_out) {
        return std::nullopt;
    }
    return std::make_pair(t_in, entering);
}

ContactInfo detect_contact(const Vec2& finger_pos, const ObjectModel& object,
                           const Pose& object_pose, double contact_threshold)
{
    const PosedFootprint posed(object, object_pose);
    const double bound = posed.signed_distance_bound(finger_pos);
    ContactInfo info;
    if (bound <= 0.0) {
        info.contact = true;
        info.depth = std::max(0.0, -bound);
        return info;
    }
    info.distance = posed.exterior_distance(finger_pos);
    info.contact = info.distance <= contact_threshold;
    return info;
}

void PushAction::validate() const
{
    if (std::abs(direction.norm() - 1.0) > 1e-9) {
        throw ValidationError("push direction must be a unit vector");
    }
    if (!(travel > 0.0) || !(step_forward > 0.0) || !(step_back > 0.0) ||
        !(contact_threshold > 0.0)) {
        throw ValidationError("push travel, step sizes and contact threshold must be positive");
    }
}

int PushAction::step_count() const
{
    return std::max(1, static_cast<int>(std::ceil(travel / step_forward - 1e-9)));
}

double PushAction::arc_length(int step) const
{
    if (step >= step_count()) {
        return travel;
    }
    return std::min(step * step_forward, travel);
}

PushAction PushAction::truncated(int steps) const
{
    PushAction cut = *this;
    cut.travel = arc_length(std::max(1, steps));
    return cut;
}

PushStepper::PushStepper(const WorldState& start, const ObjectModel& object,
                         const PushAction& action)
    : object_(&object), action_(action), state_(start)
{
    action_.validate();
    if (action_.step_forward >= object.min_edge_length()) {
        throw ConfigurationError("step_forward must be smaller than the shortest footprint edge");
    }
    const PosedFootprint posed(object, start.object_pose);
    if (posed.signed_distance_bound(action_.approach_point) < -kEdgeSlack) {
        throw ValidationError("push approach point lies inside the object");
    }
    state_.finger_pos = action_.approach_point;
    state_.in_contact =
        posed.exterior_distance(action_.approach_point) <= action_.contact_threshold;
    total_steps_ = action_.step_count();
}

ContactRecord PushStepper::step()
{
    const double s0 = action_.arc_length(step_);
    const double s1 = action_.arc_length(step_ + 1);
    ++step_;
    const Vec2& dir = action_.direction;
    const Vec2 delta = (s1 - s0) * dir;
    const Vec2 p0 = state_.finger_pos;
    const Vec2 p1 = p0 + delta;

    PosedFootprint posed(*object_, state_.object_pose);

    std::optional<std::pair<double, int>> entry;
    if (posed.signed_distance_bound(p0) <= kOnBoundary) {
        int best_edge = -1;
        double best_dot = 0.0;
        for (std::size_t i = 0; i < posed.vertices.size(); ++i) {
            if (posed.normals[i].dot(p0 - posed.vertices[i]) < -kEdgeSlack) {
                continue;
            }
            const double d = posed.normals[i].dot(dir);
            if (d < best_dot) {
                best_dot = d;
                best_edge = static_cast<int>(i);
            }
        }
        if (best_edge >= 0) {
            entry = std::make_pair(0.0, best_edge);
        }
    } else {
        entry = posed.segment_entry(p0, delta);
    }

    ContactRecord record;
    record.step = step_;
    if (entry && entry->first < 1.0) {
        const auto [t, edge] = *entry;
        const Vec2 contact = p0 + t * delta;
        const Vec2 push = (1.0 - t) * delta;
        const Twist twist =
            limit_surface_twist(contact - posed.com, push, posed.normals[edge],
                                object_->limit_surface_radius(), object_->contact_mu());
        const double yaw = state_.object_pose.yaw() + twist.angular;
        const Vec2 com = posed.com + twist.linear;
        const Vec2 origin = com - rotate(object_->com(), yaw);
        state_.object_pose =
            Pose::planar(origin.x(), origin.y(), wrap_angle(yaw), state_.object_pose.translation().z());

        posed = PosedFootprint(*object_, state_.object_pose);
        Vec2 finger = p1;
        double nearest = -std::numeric_limits<double>::infinity();
        int nearest_edge = 0;
        for (std::size_t i = 0; i < posed.vertices.size(); ++i) {
            const double d = posed.normals[i].dot(p1 - posed.vertices[i]);
            if (d > nearest) {
                nearest = d;
                nearest_edge = static_cast<int>(i);
            }
        }
        if (nearest < 0.0) {
            finger = p1 - nearest * posed.normals[nearest_edge];
        }
        state_.finger_pos = finger;
        state_.in_contact = true;
        record.pushed = push.norm();
        record.sliding = twist.sliding;
    } else {
        state_.finger_pos = p1;
        const double bound = posed.signed_distance_bound(p1);
        state_.in_contact = bound <= action_.contact_threshold &&
                            posed.exterior_distance(p1) <= action_.contact_threshold;
    }
    record.finger_pos = state_.finger_pos;
    record.object_pose = state_.object_pose;
    record.in_contact = state_.in_contact;
    return record;
}

PushResult simulate_push(const WorldState& state, const ObjectModel& object,
                         const PushAction& action, const std::optional<PushStop>& stop)
{
    PushStepper stepper(state, object, action);
    PushResult result;
    result.trace.reserve(static_cast<std::size_t>(stepper.total_steps()));
    while (!stepper.done()) {
        result.trace.push_back(stepper.step());
        if (stop && pose_metric(stepper.state().object_pose, stop->target, stop->weights) <
                        stop->tolerance) {
            break;
        }
    }
    result.state = stepper.state();
    return result;
}

PushAction finger_line_action(const WorldState& from_state, const ObjectModel& object,
                              const Pose& target, const PushParams& params)
{
    const Vec2 com = posed_com(object, from_state.object_pose);
    const Vec2 goal = posed_com(object, target);
    const Vec2 diff = goal - com;
    const double distance = diff.norm();
    if (distance <= 1e-9) {
        throw DegenerateDirectionError("target COM coincides with the current COM");
    }
    const Vec2 dir = diff / distance;
    const PosedFootprint posed(object, from_state.object_pose);
    double support = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : posed.vertices) {
        support = std::max(support, (v - com).dot(-dir));
    }

    PushAction action;
    action.approach_point = com - (support + params.step_back) * dir;
    action.direction = dir;
    action.step_forward = params.step_forward;
    action.step_back = params.step_back;
    action.contact_threshold = params.contact_threshold;
    const Vec2 reach = com - action.approach_point;
    const auto entry = posed.segment_entry(action.approach_point, reach);
    const double gap = entry ? entry->first * reach.norm() : support + params.step_back;
    action.travel = gap + distance;
    return action;
}

} // namespace porrt
