#include "couplesim/population.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <openssl/evp.h>

#include "couplesim/parallel.hpp"

namespace couplesim {

std::vector<StandardDraw> standard_draws(std::uint64_t seed, std::size_t n) {
    boost::random::mt19937_64 gen(seed);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::vector<StandardDraw> out(n);
    for (auto& d : out) {
        d.z1 = normal(gen);
        d.z2 = normal(gen);
        // midpoint of a 53-bit cell, never exactly 0 or 1
        d.u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
    }
    return out;
}

Couple couple_from_draw(const StandardDraw& d, const ModelParams& p) {
    const double s = p.sigma();
    const double r = p.rho();
    Couple c;
    c.a_m = std::exp(s * d.z1);
    c.a_f = std::exp(s * (r * d.z1 + std::sqrt(1.0 - r * r) * d.z2));
    const double D = boost::math::ibeta_inv(p.alpha(), p.beta(), d.u);
    c.D = std::clamp(D, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    return c;
}

std::vector<Couple> couples_from_draws(const std::vector<StandardDraw>& draws,
                                       const ModelParams& p) {
    std::vector<Couple> out;
    out.reserve(draws.size());
    for (const auto& d : draws) out.push_back(couple_from_draw(d, p));
    return out;
}

std::vector<Couple> draw_couples(const ModelParams& p, const PopulationConfig& cfg) {
    if (cfg.n_couples < 1) throw std::invalid_argument("population needs at least one couple");
    return couples_from_draws(standard_draws(cfg.seed, cfg.n_couples), p);
}

SimulatedPopulation solve_population(std::vector<Couple> couples, const ModelParams& p,
                                     const SolverMode& mode, unsigned threads,
                                     const SolverSettings& s) {
    SimulatedPopulation pop{p, mode, std::move(couples), {}};
    pop.solutions.resize(pop.couples.size());
    parallel_for(pop.couples.size(), threads,
                 [&](std::size_t i) { pop.solutions[i] = solve_couple(pop.couples[i], p, mode, s); });
    return pop;
}

SimulatedPopulation simulate(const ModelParams& p, const PopulationConfig& cfg) {
    return solve_population(draw_couples(p, cfg), p, cfg.mode, cfg.threads, cfg.solver);
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("sha256 init failed");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
        EVP_DigestUpdate(ctx_, buf, sizeof buf);
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md, &len);
        std::ostringstream os;
        for (unsigned i = 0; i < len; ++i)
            os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
        return os.str();
    }

private:
    EVP_MD_CTX* ctx_;
};

void add_couple(Sha256& h, const Couple& c) {
    h.add(c.a_m);
    h.add(c.a_f);
    h.add(c.D);
}

}  // namespace

std::string couples_digest(const std::vector<Couple>& couples) {
    Sha256 h;
    for (const auto& c : couples) add_couple(h, c);
    return h.hex();
}

std::string population_digest(const SimulatedPopulation& pop) {
    Sha256 h;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        add_couple(h, pop.couples[i]);
        const CoupleSolution& s = pop.solutions[i];
        for (int jm = 0; jm < 3; ++jm)
            for (int jf = 0; jf < 3; ++jf) {
                const Allocation& a = s.alloc[jm][jf];
                for (double v : {a.h_m, a.h_f, a.d_m, a.d_f, a.d_buy, a.e_m, a.e_f, a.c, a.u,
                                 a.norm_binding ? 1.0 : 0.0, s.prob[jm][jf]})
                    h.add(v);
            }
    }
    return h.hex();
}

void write_population_dump(std::ostream& os, const SimulatedPopulation& pop) {
    os << "a_m,a_f,D";
    for (auto jm : kOccupations)
        for (auto jf : kOccupations) os << ",u_" << occupation_code(jm) << "_" << occupation_code(jf);
    for (auto jm : kOccupations)
        for (auto jf : kOccupations) os << ",p_" << occupation_code(jm) << "_" << occupation_code(jf);
    os << "\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const Couple& c = pop.couples[i];
        os << c.a_m << "," << c.a_f << "," << c.D;
        for (const auto& row : pop.solutions[i].u)
            for (double v : row) os << "," << v;
        for (const auto& row : pop.solutions[i].prob)
            for (double v : row) os << "," << v;
        os << "\n";
    }
}

}  // namespace couplesim
