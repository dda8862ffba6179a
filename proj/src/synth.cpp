#include "veer/synth.hpp"

#include "veer/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace veer::synth {

std::string_view to_string(Shape shape) { return shape == Shape::concave ? "concave" : "polynomial"; }

Shape parse_shape(std::string_view name) {
    if (name == "polynomial") {
        return Shape::polynomial;
    }
    if (name == "concave") {
        return Shape::concave;
    }
    throw std::invalid_argument(fmt::format("unknown landscape shape '{}'", name));
}

double lattice_size(const LandscapeSpec& spec) {
    return std::pow(2.0, static_cast<double>(spec.n_binary)) *
           std::pow(static_cast<double>(spec.numeric_levels), static_cast<double>(spec.n_numeric));
}

namespace {

// Streams of the spec seed.
constexpr std::uint64_t kLatticeStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kPolynomialStream = 100;

constexpr std::size_t kInteractionTerms = 3;

void validate(const LandscapeSpec& spec) {
    if (spec.n_objectives < 2) {
        throw std::invalid_argument("landscape needs at least two objectives");
    }
    if (spec.n_binary + spec.n_numeric == 0) {
        throw std::invalid_argument("landscape needs at least one option");
    }
    if (spec.n_numeric > 0 && spec.numeric_levels < 2) {
        throw std::invalid_argument("numeric options need at least two levels");
    }
    if (spec.n_rows == 0) {
        throw std::invalid_argument("landscape needs at least one row");
    }
    if (!(spec.correlation >= -1.0 && spec.correlation <= 1.0)) {
        throw std::invalid_argument("correlation must lie in [-1, 1]");
    }
    if (!(spec.noise >= 0.0)) {
        throw std::invalid_argument("noise must be non-negative");
    }
    if (static_cast<double>(spec.n_rows) > lattice_size(spec)) {
        throw std::invalid_argument(fmt::format("{} rows requested but the option lattice holds only {}",
                                                spec.n_rows, lattice_size(spec)));
    }
    if (spec.shape == Shape::concave) {
        if (spec.n_numeric < spec.n_objectives - 1) {
            throw std::invalid_argument("concave landscape needs n_numeric >= n_objectives - 1");
        }
        if (spec.n_binary == 0) {
            throw std::invalid_argument("concave landscape needs at least one binary option");
        }
    }
}

/// Mixed-radix digits: binary options first, then numeric options.
std::vector<std::size_t> radices(const LandscapeSpec& spec) {
    std::vector<std::size_t> r(spec.n_binary, 2);
    r.insert(r.end(), spec.n_numeric, spec.numeric_levels);
    return r;
}

std::vector<double> decode(const LandscapeSpec& spec, const std::vector<std::size_t>& digits) {
    std::vector<double> values(digits.size());
    for (std::size_t i = 0; i < digits.size(); ++i) {
        values[i] = i < spec.n_binary ? static_cast<double>(digits[i])
                                      : static_cast<double>(digits[i]) / static_cast<double>(spec.numeric_levels - 1);
    }
    return values;
}

std::vector<std::vector<double>> sample_configs(const LandscapeSpec& spec) {
    Rng rng(spec.seed, kLatticeStream);
    const std::vector<std::size_t> radix = radices(spec);
    std::vector<std::vector<double>> out;
    out.reserve(spec.n_rows);

    if (lattice_size(spec) <= 4.0 * static_cast<double>(spec.n_rows)) {
        // Dense request: draw lattice indices without replacement.
        const auto total = static_cast<std::size_t>(lattice_size(spec));
        std::vector<std::size_t> all(total);
        for (std::size_t i = 0; i < total; ++i) {
            all[i] = i;
        }
        for (std::size_t index : rng.sample(all, spec.n_rows)) {
            std::vector<std::size_t> digits(radix.size());
            for (std::size_t d = 0; d < radix.size(); ++d) {
                digits[d] = index % radix[d];
                index /= radix[d];
            }
            out.push_back(decode(spec, digits));
        }
        return out;
    }

    std::set<std::vector<std::size_t>> seen;
    while (out.size() < spec.n_rows) {
        std::vector<std::size_t> digits(radix.size());
        for (std::size_t d = 0; d < radix.size(); ++d) {
            digits[d] = rng.below(radix[d]);
        }
        if (seen.insert(digits).second) {
            out.push_back(decode(spec, digits));
        }
    }
    return out;
}

/// Sparse quadratic: a linear term per option plus a few pairwise products.
struct Polynomial {
    struct Term {
        std::size_t p = 0;
        std::size_t q = 0;
        double coef = 0.0;
    };
    std::vector<double> linear;
    std::vector<Term> interactions;

    static Polynomial draw(Rng& rng, std::size_t n_options, double lo, double hi) {
        Polynomial poly;
        for (std::size_t i = 0; i < n_options; ++i) {
            poly.linear.push_back(rng.uniform(lo, hi));
        }
        for (std::size_t t = 0; t < kInteractionTerms; ++t) {
            const std::size_t p = rng.below(n_options);
            const std::size_t q = rng.below(n_options);
            poly.interactions.push_back({p, q, rng.uniform(lo, hi)});
        }
        return poly;
    }

    double operator()(std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < linear.size(); ++i) {
            s += linear[i] * x[i];
        }
        for (const auto& t : interactions) {
            s += t.coef * x[t.p] * x[t.q];
        }
        return s;
    }
};

std::vector<double> polynomial_objectives(const LandscapeSpec& spec, const std::vector<Polynomial>& polys,
                                          std::span<const double> x) {
    std::vector<double> y(spec.n_objectives);
    y[0] = polys[0](x);
    const double mix = 1.0 - std::abs(spec.correlation);
    for (std::size_t k = 1; k < spec.n_objectives; ++k) {
        y[k] = spec.correlation * y[0] + mix * polys[k](x);
    }
    return y;
}

/// Position on the sphere from numeric option means, radius from binary options.
std::vector<double> concave_objectives(const LandscapeSpec& spec, const Polynomial& penalty, std::span<const double> x) {
    const std::size_t m = spec.n_objectives;
    std::vector<double> angle(m - 1, 0.0);
    std::vector<std::size_t> count(m - 1, 0);
    for (std::size_t i = 0; i < spec.n_numeric; ++i) {
        angle[i % (m - 1)] += x[spec.n_binary + i];
        ++count[i % (m - 1)];
    }
    for (std::size_t j = 0; j < m - 1; ++j) {
        angle[j] = angle[j] / static_cast<double>(count[j]) * std::numbers::pi / 2.0;
    }
    const double radius = 1.0 + penalty(x.first(spec.n_binary));

    std::vector<double> y(m, radius);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j + k + 1 < m; ++j) {
            y[k] *= std::cos(angle[j]);
        }
        if (k > 0) {
            y[k] *= std::sin(angle[m - 1 - k]);
        }
    }
    return y;
}

} // namespace

ConfigSpace generate(const LandscapeSpec& spec) {
    validate(spec);
    const std::vector<std::vector<double>> configs = sample_configs(spec);
    const std::size_t n_options = spec.n_binary + spec.n_numeric;

    std::vector<Polynomial> polys;
    for (std::size_t k = 0; k < spec.n_objectives; ++k) {
        Rng rng(spec.seed, kPolynomialStream + k);
        polys.push_back(spec.shape == Shape::concave ? Polynomial::draw(rng, spec.n_binary, 0.0, 1.0 / static_cast<double>(spec.n_binary))
                                                     : Polynomial::draw(rng, n_options, -1.0, 1.0));
    }

    Rng noise(spec.seed, kNoiseStream);
    std::vector<Row> rows;
    rows.reserve(configs.size());
    for (std::size_t id = 0; id < configs.size(); ++id) {
        std::vector<double> y = spec.shape == Shape::concave ? concave_objectives(spec, polys[0], configs[id])
                                                             : polynomial_objectives(spec, polys, configs[id]);
        if (spec.noise > 0.0) {
            for (double& v : y) {
                v += spec.noise * noise.gaussian();
            }
        }
        rows.push_back({{id, configs[id]}, {std::move(y), std::nullopt}});
    }

    std::vector<OptionSchema> options;
    for (std::size_t i = 0; i < n_options; ++i) {
        std::vector<double> domain;
        for (const auto& c : configs) {
            domain.push_back(c[i]);
        }
        std::sort(domain.begin(), domain.end());
        domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
        const bool binary = domain.size() == 2 && domain[0] == 0.0 && domain[1] == 1.0;
        const std::string name = i < spec.n_binary ? fmt::format("b{}", i) : fmt::format("n{}", i - spec.n_binary);
        options.push_back({name, binary ? OptionKind::binary : OptionKind::numeric, std::move(domain)});
    }
    std::vector<ObjectiveSchema> objectives;
    for (std::size_t k = 0; k < spec.n_objectives; ++k) {
        objectives.push_back({fmt::format("obj{}", k + 1), Direction::minimize});
    }
    return ConfigSpace(std::move(options), std::move(objectives), std::move(rows));
}

nlohmann::json to_json(const LandscapeSpec& spec) {
    return {
        {"n_binary", spec.n_binary},
        {"n_numeric", spec.n_numeric},
        {"n_rows", spec.n_rows},
        {"n_objectives", spec.n_objectives},
        {"correlation", spec.correlation},
        {"noise", spec.noise},
        {"seed", spec.seed},
        {"numeric_levels", spec.numeric_levels},
        {"shape", std::string(to_string(spec.shape))},
    };
}

LandscapeSpec spec_from_json(const nlohmann::json& json) {
    LandscapeSpec spec;
    spec.n_binary = json.value("n_binary", spec.n_binary);
    spec.n_numeric = json.value("n_numeric", spec.n_numeric);
    spec.n_rows = json.value("n_rows", spec.n_rows);
    spec.n_objectives = json.value("n_objectives", spec.n_objectives);
    spec.correlation = json.value("correlation", spec.correlation);
    spec.noise = json.value("noise", spec.noise);
    spec.seed = json.value("seed", spec.seed);
    spec.numeric_levels = json.value("numeric_levels", spec.numeric_levels);
    spec.shape = parse_shape(json.value("shape", std::string(to_string(spec.shape))));
    return spec;
}

} // namespace veer::synth
