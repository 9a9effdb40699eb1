#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "slfv/geometry.hpp"
#include "slfv/rng.hpp"
#include "slfv/semigroup.hpp"
#include "slfv/stats.hpp"

namespace slfv {

/// p₀ = c, p₁ = 1 − c(1+β), p_k = c |binom(1+β, k)| for 2 ≤ k ≤ k_max; the tail beyond k_max is
/// folded into k_max and the mean restored to 1 by moving mass between p₀ and p₁.
std::vector<double> stable_offspring_pmf(double beta, double c, std::size_t k_max);

/// Walker–Vose alias table.
class AliasTable {
public:
    explicit AliasTable(const std::vector<double>& weights);
    std::size_t sample(Rng& rng) const;
    std::size_t size() const { return prob_.size(); }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

struct OffspringLaw {
    enum class Kind { critical_binary, stable };
    Kind kind = Kind::critical_binary;
    /// Branching rate per particle.
    double rate = 0.0;
    double beta = 1.0;
    double c = 0.5;
    std::vector<double> pmf;
    std::shared_ptr<const AliasTable> table;

    /// λ = 2κ/ε: total-mass variance rate 2κ⟨X,1⟩.
    static OffspringLaw critical_binary(double kappa, double particle_mass);
    /// λ = κ/(c ε^β): total-mass Laplace exponent κθ^{1+β}.
    static OffspringLaw stable(double beta, double kappa, double particle_mass, double c = 0.5,
                               std::size_t k_max = 1000000);

    std::size_t sample(Rng& rng) const;
    double mean() const;
};

struct ParticleCloud {
    int dimension = 1;
    double particle_mass = 1.0;
    double time = 0.0;
    std::vector<Point> positions;

    double total_mass() const { return particle_mass * static_cast<double>(positions.size()); }
    /// Particles of mass ε approximating the density f on [lo, hi]^d by cell-centred placement.
    static ParticleCloud from_density(int d, const std::function<double(const Point&)>& f, double lo, double hi,
                                      double particle_mass, double cell);
    /// z0/ε particles at the origin.
    static ParticleCloud point_mass(int d, double z0, double particle_mass);
};

struct SbmConfig {
    double m_diff = 1.0;
    OffspringLaw offspring;
    double t_end = 1.0;
    int grid_points = 4;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    /// Count-only mode drops positions (total-mass questions).
    bool track_positions = true;
    double max_particles = 2e7;
    double event_budget = 2e9;
    std::vector<std::function<double(const Point&)>> observables;
};

struct SbmPath {
    std::vector<double> times;
    std::vector<double> mass;
    /// observables[k][j]: ⟨X_{t_j}, φ_k⟩.
    std::vector<std::vector<double>> observables;
    ParticleCloud final;
    std::size_t events = 0;
};

/// Branching Brownian motion: Gaussian increments of variance m·dt per coordinate between
/// exponential branching times.
SbmPath run_sbm_particles(const ParticleCloud& initial, const SbmConfig& config);

/// Monte Carlo mean of exp(−⟨X_{t_j}, φ_k⟩) over paths.
Estimate laplace_functional(const std::vector<SbmPath>& paths, std::size_t observable, std::size_t grid_index);

/// u_t(θ) = θ(1 + κβθ^β t)^{−1/β}, solving u̇ = −κu^{1+β}.
double stable_csbp_u(double beta, double kappa, double theta, double t);

struct CsbpReference {
    double reference = 0.0;
    Estimate mc;
    double z = 0.0;
};

/// E[e^{−θZ_t}] = e^{−z₀u_t(θ)} together with the count-only particle estimate.
CsbpReference stable_total_mass_reference(double beta, double kappa, double z0, double theta, double t,
                                          std::size_t replicates, double particle_mass, std::uint64_t seed,
                                          int workers = 1, std::size_t k_max = 1000000);

/// u̇ = (m/2)Δu − κu^{1+β}, u(0) = φ, by Strang splitting (exact reaction, Gaussian diffusion).
Grid1D reaction_diffusion(const Grid1D& phi, double t, double m_diff, double kappa, double beta, double dt);

} // namespace slfv
