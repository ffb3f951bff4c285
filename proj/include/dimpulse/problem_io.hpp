#ifndef DIMPULSE_PROBLEM_IO_HPP
#define DIMPULSE_PROBLEM_IO_HPP

#include <string>

#include "dimpulse/lattice.hpp"
#include "dimpulse/model.hpp"

namespace dimpulse {

struct ProblemFile {
    ProblemSpec spec;
    GridRequest grid;
};

/// Strict JSON loader: unknown or missing keys are SchemaViolation,
/// malformed JSON is ParseError (with the parser's position info).
ProblemFile load_problem(const std::string& path);
ProblemFile parse_problem(const std::string& text);

/// Canonical serialization (stable key order); load(serialize(x)) == x.
std::string serialize_problem(const ProblemFile& file);

bool problems_equal(const ProblemFile& a, const ProblemFile& b);

} // namespace dimpulse

#endif // DIMPULSE_PROBLEM_IO_HPP
