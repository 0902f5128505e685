#pragma once

#include <nlohmann/json.hpp>

#include "porrt/dynamics.hpp"
#include "porrt/geometry.hpp"

namespace porrt::detail {

inline nlohmann::json to_json(const Pose& p)
{
    const auto a = p.to_array();
    return nlohmann::json(std::vector<double>(a.begin(), a.end()));
}

inline nlohmann::json to_json(const Vec2& v)
{
    return nlohmann::json::array({v.x(), v.y()});
}

inline nlohmann::json to_json(const PushAction& a)
{
    return {{"approach", to_json(a.approach_point)},
            {"direction", to_json(a.direction)},
            {"travel", a.travel},
            {"step_forward", a.step_forward},
            {"step_back", a.step_back},
            {"contact_threshold", a.contact_threshold}};
}

inline Pose pose_from_json(const nlohmann::json& j)
{
    return Pose::from_array(j.get<std::vector<double>>());
}

inline Vec2 vec2_from_json(const nlohmann::json& j)
{
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline PushAction action_from_json(const nlohmann::json& j)
{
    PushAction a;
    a.approach_point = vec2_from_json(j.at("approach"));
    a.direction = vec2_from_json(j.at("direction"));
    a.travel = j.at("travel").get<double>();
    a.step_forward = j.at("step_forward").get<double>();
    a.step_back = j.at("step_back").get<double>();
    a.contact_threshold = j.at("contact_threshold").get<double>();
    return a;
}

} // namespace porrt::detail
