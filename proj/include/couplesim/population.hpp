#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "couplesim/household.hpp"
#include "couplesim/model.hpp"

namespace couplesim {

struct PopulationConfig {
    std::size_t n_couples = 100000;
    std::uint64_t seed = 20240917;
    SolverMode mode{};
    unsigned threads = 0;  // 0 = all cores
    SolverSettings solver{};
};

// Parameter-free random inputs for one couple: two independent standard
// normals and a uniform in (0,1). Couples are a deterministic transform of
// these, so every parameter vector sees the same underlying draws.
struct StandardDraw {
    double z1 = 0.0;
    double z2 = 0.0;
    double u = 0.5;
};

// mt19937_64 stream; normals from Boost's ziggurat, uniforms from the top
// 53 bits. Reproducible across platforms for a given seed.
std::vector<StandardDraw> standard_draws(std::uint64_t seed, std::size_t n);

// log a = Cholesky([[s, 0], [rho s, s sqrt(1-rho^2)]]) z; D = Beta^{-1}(u).
Couple couple_from_draw(const StandardDraw& d, const ModelParams& p);
std::vector<Couple> couples_from_draws(const std::vector<StandardDraw>& draws,
                                       const ModelParams& p);

std::vector<Couple> draw_couples(const ModelParams& p, const PopulationConfig& cfg);

struct SimulatedPopulation {
    ModelParams params;
    SolverMode mode;
    std::vector<Couple> couples;
    std::vector<CoupleSolution> solutions;  // parallel to couples

    std::size_t size() const { return couples.size(); }
};

SimulatedPopulation solve_population(std::vector<Couple> couples, const ModelParams& p,
                                     const SolverMode& mode, unsigned threads = 0,
                                     const SolverSettings& s = {});

SimulatedPopulation simulate(const ModelParams& p, const PopulationConfig& cfg);

// Canonical little-endian byte serialisation of couples and solutions and its
// SHA-256; equal digests mean bit-identical populations.
std::string population_digest(const SimulatedPopulation& pop);
std::string couples_digest(const std::vector<Couple>& couples);

// One row per couple: a_m, a_f, D, 9 utilities, 9 probabilities.
void write_population_dump(std::ostream& os, const SimulatedPopulation& pop);

}  // namespace couplesim
