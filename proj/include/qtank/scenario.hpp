#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "qtank/sim_engine.hpp"

namespace qtank::scenario {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Command-line overrides applied around the file contents: phase replaces
/// the [operating_point] phase before defaults resolve; dt and t_end replace
/// the [sim] values afterwards.
struct Overrides {
    std::optional<plant::Phase> phase;
    std::optional<double> dt;
    std::optional<double> t_end;
};

/// Parses the sectioned key-value scenario text. An empty file yields the
/// reference minimum-phase scenario; unknown sections or keys are hard
/// errors carrying the line number. The decimal separator is always '.'.
sim::SimConfig parse_scenario(const std::string& text, const Overrides& overrides = {});

/// Serializes a config to scenario text such that parse(emit(cfg)) == cfg.
std::string emit_scenario(const sim::SimConfig& cfg);

} // namespace qtank::scenario
