#include "porrt/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "json_io.hpp"
#include "porrt/errors.hpp"

namespace porrt {

namespace {

using nlohmann::json;

struct Scene {
    std::vector<Vec2> footprint;
    Vec2 com = Vec2::Zero();
    Pose start;
    Pose goal;
    std::optional<Pose> final_pose;
    Vec2 lower = Vec2::Zero();
    Vec2 upper = Vec2::Ones();
    std::vector<std::pair<Vec2, Vec2>> edges;
    std::vector<Vec2> path;
};

Vec2 place(const Vec2& v, const Pose& pose)
{
    const double yaw = pose.yaw();
    return pose.xy() + Vec2(std::cos(yaw) * v.x() - std::sin(yaw) * v.y(),
                            std::sin(yaw) * v.x() + std::cos(yaw) * v.y());
}

void read_scene(const json& j, Scene& scene)
{
    for (const json& v : j.at("object").at("footprint")) {
        scene.footprint.push_back(detail::vec2_from_json(v));
    }
    scene.com = detail::vec2_from_json(j.at("object").at("com"));
    scene.start = detail::pose_from_json(j.at("start"));
    scene.goal = detail::pose_from_json(j.at("goal"));
    scene.lower = detail::vec2_from_json(j.at("workspace").at("lower"));
    scene.upper = detail::vec2_from_json(j.at("workspace").at("upper"));
}

Scene scene_from_tree(const json& j)
{
    Scene scene;
    read_scene(j, scene);
    std::vector<Pose> poses;
    std::vector<int> parents;
    for (const json& n : j.at("nodes")) {
        poses.push_back(detail::pose_from_json(n.at("pose")));
        parents.push_back(n.at("parent").get<int>());
    }
    for (const json& e : j.at("edges")) {
        const auto parent = static_cast<std::size_t>(e.at("parent").get<int>());
        const auto child = static_cast<std::size_t>(e.at("child").get<int>());
        scene.edges.emplace_back(place(scene.com, poses.at(parent)), place(scene.com, poses.at(child)));
    }
    const int plan_node = j.value("plan_node", -1);
    if (plan_node > 0) {
        scene.final_pose = poses.at(static_cast<std::size_t>(plan_node));
        for (int id = plan_node; id >= 0; id = parents.at(static_cast<std::size_t>(id))) {
            scene.path.insert(scene.path.begin(), place(scene.com, poses.at(static_cast<std::size_t>(id))));
        }
    }
    return scene;
}

Scene scene_from_trace(const std::string& text)
{
    Scene scene;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const json j = json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "header") {
            read_scene(j, scene);
            scene.path.push_back(place(scene.com, scene.start));
            header = true;
        } else if (!header) {
            throw FormatError("trace lacks a header record");
        } else if ((type == "step" || type == "stage") && !j.at("object_pose").is_null()) {
            scene.path.push_back(place(scene.com, detail::pose_from_json(j.at("object_pose"))));
        } else if (type == "result") {
            scene.final_pose = detail::pose_from_json(j.at("final_pose"));
        }
    }
    if (!header) {
        throw FormatError("trace lacks a header record");
    }
    return scene;
}

class Canvas {
public:
    Canvas(const Vec2& lower, const Vec2& upper) : lower_(lower), upper_(upper)
    {
        const Vec2 span = (upper - lower).cwiseMax(Vec2(1e-9, 1e-9));
        scale_ = kSize / std::max(span.x(), span.y());
    }

    Vec2 map(const Vec2& p) const
    {
        return {kMargin + (p.x() - lower_.x()) * scale_, kMargin + (upper_.y() - p.y()) * scale_};
    }

    std::string xy(const Vec2& p) const
    {
        const Vec2 q = map(p);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", q.x(), q.y());
        return buf;
    }

    double width(const Vec2& lower, const Vec2& upper) const
    {
        return 2 * kMargin + (upper.x() - lower.x()) * scale_;
    }
    double height(const Vec2& lower, const Vec2& upper) const
    {
        return 2 * kMargin + (upper.y() - lower.y()) * scale_;
    }

    static constexpr double kSize = 800.0;
    static constexpr double kMargin = 20.0;

private:
    Vec2 lower_;
    Vec2 upper_;
    double scale_ = 1.0;
};

std::string polygon(const Canvas& canvas, const Scene& scene, const Pose& pose, const char* cls)
{
    std::string points;
    for (const Vec2& v : scene.footprint) {
        if (!points.empty()) {
            points += ' ';
        }
        points += canvas.xy(place(v, pose));
    }
    return std::string("<polygon class=\"") + cls + "\" points=\"" + points + "\"/>\n";
}

std::string draw(const Scene& scene)
{
    const Canvas canvas(scene.lower, scene.upper);
    std::ostringstream out;
    char size[96];
    std::snprintf(size, sizeof size, "width=\"%.0f\" height=\"%.0f\"",
                  canvas.width(scene.lower, scene.upper), canvas.height(scene.lower, scene.upper));
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" " << size << ">\n";
    out << "<style>.workspace{fill:#fafafa;stroke:#888}.edge{stroke:#9ab;stroke-width:1}"
           ".start{fill:none;stroke:#2a7;stroke-width:2}.goal{fill:none;stroke:#c33;stroke-width:2}"
           ".final{fill:none;stroke:#36c;stroke-width:2;stroke-dasharray:4}"
           ".plan,.trace{fill:none;stroke:#333;stroke-width:2}</style>\n";
    const Vec2 top_left = canvas.map(Vec2(scene.lower.x(), scene.upper.y()));
    const Vec2 bottom_right = canvas.map(Vec2(scene.upper.x(), scene.lower.y()));
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "<rect class=\"workspace\" x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\"/>\n",
                  top_left.x(), top_left.y(), bottom_right.x() - top_left.x(),
                  bottom_right.y() - top_left.y());
    out << buf;
    for (const auto& [a, b] : scene.edges) {
        const Vec2 pa = canvas.map(a);
        const Vec2 pb = canvas.map(b);
        std::snprintf(buf, sizeof buf,
                      "<line class=\"edge\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\"/>\n",
                      pa.x(), pa.y(), pb.x(), pb.y());
        out << buf;
    }
    if (scene.path.size() > 1) {
        const char* cls = scene.edges.empty() ? "trace" : "plan";
        out << "<polyline class=\"" << cls << "\" points=\"";
        for (std::size_t i = 0; i < scene.path.size(); ++i) {
            out << (i ? " " : "") << canvas.xy(scene.path[i]);
        }
        out << "\"/>\n";
    }
    out << polygon(canvas, scene, scene.start, "start");
    out << polygon(canvas, scene, scene.goal, "goal");
    if (scene.final_pose) {
        out << polygon(canvas, scene, *scene.final_pose, "final");
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace

std::string render_svg_text(const std::string& input)
{
    try {
        const auto first = input.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) {
            throw FormatError("empty render input");
        }
        // A tree file is one JSON document; a trace has one record per line.
        json doc;
        bool single = true;
        try {
            doc = json::parse(input);
        } catch (const json::parse_error&) {
            single = false;
        }
        if (single && doc.is_object() && doc.value("type", "") == "tree") {
            return draw(scene_from_tree(doc));
        }
        return draw(scene_from_trace(input));
    } catch (const json::exception& e) {
        throw FormatError(std::string("cannot render input: ") + e.what());
    } catch (const ValidationError& e) {
        throw FormatError(std::string("cannot render input: ") + e.what());
    }
}

void render_svg(const std::filesystem::path& input, const std::filesystem::path& output)
{
    std::ifstream in(input);
    if (!in) {
        throw FormatError("cannot read " + input.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string svg = render_svg_text(ss.str());
    std::ofstream out(output);
    if (!out) {
        throw FormatError("cannot write " + output.string());
    }
    out << svg;
}

} // namespace porrt
