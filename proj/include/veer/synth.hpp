#pragma once

#include "veer/dataspace.hpp"

#include <json.hpp>

#include <cstdint>
#include <string_view>

namespace veer::synth {

/// polynomial: objective 1 is a sparse quadratic over the options; further
/// objectives mix it with independent polynomials by `correlation`.
/// concave: objectives lie on or behind a quarter hypersphere around the
/// origin (a non-convex front), with numeric options setting the position
/// on the sphere and binary options the distance behind it.
enum class Shape { polynomial, concave };

std::string_view to_string(Shape shape);
Shape parse_shape(std::string_view name);

struct LandscapeSpec {
    std::size_t n_binary = 4;
    std::size_t n_numeric = 4;
    std::size_t n_rows = 500;
    std::size_t n_objectives = 2;
    /// Target correlation between objective 1 and the others (polynomial shape only).
    double correlation = 0.0;
    /// Standard deviation of the gaussian noise added to every objective.
    double noise = 0.0;
    std::uint64_t seed = 0;
    /// Levels of every numeric option, spaced evenly over [0, 1].
    std::size_t numeric_levels = 5;
    Shape shape = Shape::polynomial;
};

/// Option lattice size, saturating at the largest double.
double lattice_size(const LandscapeSpec& spec);

/// Distinct configurations drawn uniformly from the lattice, with objectives.
/// Deterministic per spec.
ConfigSpace generate(const LandscapeSpec& spec);

nlohmann::json to_json(const LandscapeSpec& spec);
LandscapeSpec spec_from_json(const nlohmann::json& json);

} // namespace veer::synth
