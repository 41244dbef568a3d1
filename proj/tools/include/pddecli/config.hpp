#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdde/analysis.hpp"
#include "pdde/mild.hpp"

namespace pddecli {

/// Raised for anything that makes the run configuration unusable:
/// missing file, malformed JSON, or a violated model assumption.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    pdde::SpatialGrid grid;
    pdde::TimeGrid time;
    pdde::ParameterPoint system;

    // initial datum: one expression per component; head in x, tail in (t, x)
    // with t ranging over (-1, 0)
    std::vector<pdde::CoeffExpr> head;
    std::vector<pdde::CoeffExpr> tail;
    double history_r = pdde::kInf;

    pdde::Scheme scheme = pdde::Scheme::crank_nicolson;
    pdde::Quadrature quadrature = pdde::Quadrature::trapezoid;
    std::string method = "marching";   // or "picard"
    pdde::PicardConfig picard;

    std::vector<double> norm_qs{2.0};
    bool snapshots = false;

    std::optional<pdde::StudyOptions> study;

    std::string source_path;
    std::string config_hash;
};

// Parses and validates; throws ConfigError naming the problem (and the
// violated assumption when the model data is at fault).
RunConfig load_config(const std::string& path);

pdde::HistorySegment build_history(const RunConfig& cfg);

int detect_threads();   // PDDE_THREADS, default 1

}  // namespace pddecli
