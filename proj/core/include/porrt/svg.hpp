#pragma once

#include <filesystem>
#include <string>

namespace porrt {

/// Top-down SVG of a tree file (JSON) or trace file (JSON Lines): workspace,
/// object footprint at start, goal and final pose, one `<line class="edge">`
/// per tree edge, and the executed path. Throws FormatError on unreadable input.
std::string render_svg_text(const std::string& input);

void render_svg(const std::filesystem::path& input, const std::filesystem::path& output);

} // namespace porrt
