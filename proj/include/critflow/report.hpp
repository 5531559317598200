#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "critflow/bifurcate.hpp"
#include "critflow/deform.hpp"
#include "critflow/galerkin.hpp"
#include "critflow/spectral.hpp"
#include "critflow/topology.hpp"

namespace critflow::report {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// {"schema_version": 1, "command": command}
json envelope(const std::string& command);

std::string number(double v);  // shortest round-trip decimal, "nan"/"inf" spelled out

json to_json(const topology::BettiVector& b);
json to_json(const bifurcate::Landmark& m);
json to_json(const bifurcate::BranchLandmarks& lm);
json to_json(const bifurcate::HypothesisReport& h);
json to_json(const deform::TransportWitness& w);
json to_json(const spectral::CrossingResult& c);
json to_json(const galerkin::StabilizationReport& s);
json to_json(const galerkin::IndefiniteReport& r);
json to_json(const bifurcate::EversionReport& r);

/// Component table with per-component classification when supplied.
json branch_summary(const bifurcate::BranchSet& branch, const std::vector<bifurcate::Alternative>& per_component = {});

/// lambda,y,x0..x{d-1},grad_norm,kind,component
std::string pairs_csv(const bifurcate::BranchSet& branch);
/// lambda,eig_1..eig_d
std::string eigenvalue_csv(const spectral::EigenTrace& trace);
/// n,sign_minus,sign_plus,endpoint_pairs,y_terminal,witness_norm,drift
std::string drift_csv(const galerkin::StabilizationReport& s);

/// (lambda, y) portrait: window rectangles D+ and D-, the trivial line,
/// links coloured by component, and the separating curves when given.
std::string branch_svg(const bifurcate::BranchSet& branch, double eps,
                       const std::optional<bifurcate::SeparatingCurves>& curves = std::nullopt);

/// Creates parent directories; throws InvalidArgument when the file cannot be written.
void write_file(const std::string& path, const std::string& content);
/// Pretty-printed JSON with a trailing newline.
std::string dump(const json& j);

}  // namespace critflow::report
