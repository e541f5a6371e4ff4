#pragma once

#include <span>
#include <string>

#include "cradl/results.hpp"

namespace cradl {

/// Loss against iteration on a log-scale y axis, one line per configuration
/// with losses averaged over seeds. Returns a standalone SVG document.
std::string render_loss_svg(std::span<const ResultRow> rows, const std::string& title);

}  // namespace cradl
