#pragma once

// Theory constants and bound values for the first run an experiment describes.

#include <ostream>
#include <string>
#include <vector>

#include "cradl/experiment.hpp"
#include "cradl/theory.hpp"

namespace cradl {

struct TheoryRow {
    std::string name;
    double value = 0.0;
    std::string note;  // why a value is NaN, or how it was obtained
};

/// Runs the configured trajectory once to certify beta as its supremum.
std::vector<TheoryRow> theory_report(const Experiment& e);

void write_theory(std::ostream& os, const std::vector<TheoryRow>& rows);

}  // namespace cradl
