#include "slfv/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slfv {

std::vector<double> stable_offspring_pmf(double beta, double c, std::size_t k_max) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("stable_offspring_pmf needs β in (0,1]");
    if (!(c > 0.0 && c <= 1.0 / (1.0 + beta))) throw std::invalid_argument("stable_offspring_pmf needs 0 < c <= 1/(1+β)");
    if (k_max < 2) throw std::invalid_argument("stable_offspring_pmf needs k_max >= 2");
    std::vector<double> p(k_max + 1, 0.0);
    p[0] = c;
    p[1] = 1.0 - c * (1.0 + beta);
    double term = c * (1.0 + beta) * beta / 2.0;
    for (std::size_t k = 2; k <= k_max; ++k) {
        p[k] = term;
        term *= (static_cast<double>(k) - 1.0 - beta) / static_cast<double>(k + 1);
    }
    // Summing from the small end of the tail keeps the total accurate.
    double body = 0.0;
    for (std::size_t k = k_max + 1; k-- > 0;) body += p[k];
    p[k_max] += std::max(0.0, 1.0 - body);
    double mean = 0.0;
    for (std::size_t k = k_max + 1; k-- > 1;) mean += static_cast<double>(k) * p[k];
    const double delta = 1.0 - mean;
    if (delta > 0.0) {
        if (delta > p[0]) throw std::runtime_error("stable_offspring_pmf: k_max too small to re-centre the mean");
        p[0] -= delta;
        p[1] += delta;
    } else if (delta < 0.0) {
        if (-delta > p[1]) throw std::runtime_error("stable_offspring_pmf: cannot re-centre the mean");
        p[1] += delta;
        p[0] -= delta;
    }
    return p;
}

AliasTable::AliasTable(const std::vector<double>& weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw std::invalid_argument("AliasTable needs weights");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / total;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;
}

std::size_t AliasTable::sample(Rng& rng) const {
    const std::size_t i = rng.below(prob_.size());
    return rng.uniform() < prob_[i] ? i : alias_[i];
}

OffspringLaw OffspringLaw::critical_binary(double kappa, double eps) {
    if (!(kappa > 0.0 && eps > 0.0)) throw std::invalid_argument("critical_binary needs κ > 0 and ε > 0");
    OffspringLaw o;
    o.kind = Kind::critical_binary;
    o.rate = 2.0 * kappa / eps;
    o.beta = 1.0;
    o.c = 0.5;
    o.pmf = {0.5, 0.0, 0.5};
    return o;
}

OffspringLaw OffspringLaw::stable(double beta, double kappa, double eps, double c, std::size_t k_max) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("stable offspring needs β in (0,1)");
    if (!(kappa > 0.0 && eps > 0.0)) throw std::invalid_argument("stable offspring needs κ > 0 and ε > 0");
    OffspringLaw o;
    o.kind = Kind::stable;
    o.beta = beta;
    o.c = c;
    o.rate = kappa / (c * std::pow(eps, beta));
    o.pmf = stable_offspring_pmf(beta, c, k_max);
    o.table = std::make_shared<const AliasTable>(o.pmf);
    return o;
}

std::size_t OffspringLaw::sample(Rng& rng) const {
    if (kind == Kind::critical_binary) return rng.uniform() < 0.5 ? 0 : 2;
    return table->sample(rng);
}

double OffspringLaw::mean() const {
    double m = 0.0;
    for (std::size_t k = pmf.size(); k-- > 1;) m += static_cast<double>(k) * pmf[k];
    return m;
}

ParticleCloud ParticleCloud::from_density(int d, const std::function<double(const Point&)>& f, double lo, double hi,
                                          double eps, double cell) {
    ParticleCloud pc;
    pc.dimension = d;
    pc.particle_mass = eps;
    const auto n = static_cast<long>(std::ceil((hi - lo) / cell));
    const long n1 = d > 1 ? n : 1, n2 = d > 2 ? n : 1;
    const double vol = std::pow(cell, d);
    double carry = 0.0;
    for (long k = 0; k < n2; ++k)
        for (long j = 0; j < n1; ++j)
            for (long i = 0; i < n; ++i) {
                Point x{lo + (i + 0.5) * cell, d > 1 ? lo + (j + 0.5) * cell : 0.0, d > 2 ? lo + (k + 0.5) * cell : 0.0};
                // Deterministic rounding with carried remainder keeps the total mass within one ε.
                carry += f(x) * vol / eps;
                const auto count = static_cast<long>(std::floor(carry + 0.5));
                carry -= static_cast<double>(count);
                for (long c = 0; c < count; ++c) pc.positions.push_back(x);
            }
    return pc;
}

ParticleCloud ParticleCloud::point_mass(int d, double z0, double eps) {
    ParticleCloud pc;
    pc.dimension = d;
    pc.particle_mass = eps;
    pc.positions.assign(static_cast<std::size_t>(std::llround(z0 / eps)), Point{0.0, 0.0, 0.0});
    return pc;
}

SbmPath run_sbm_particles(const ParticleCloud& initial, const SbmConfig& cfg) {
    const OffspringLaw& law = cfg.offspring;
    if (!(law.rate > 0.0)) throw std::invalid_argument("run_sbm_particles needs a positive branching rate");
    const int d = initial.dimension;
    const double eps = initial.particle_mass;
    Rng rng(cfg.seed, cfg.stream);
    SbmPath path;
    const int G = std::max(cfg.grid_points, 1);
    path.observables.assign(cfg.observables.size(), {});

    std::vector<Point> pos;
    std::vector<double> stamp;
    std::size_t count = initial.positions.size();
    if (cfg.track_positions) {
        pos = initial.positions;
        stamp.assign(count, initial.time);
    }
    const double t0 = initial.time;
    auto diffuse = [&](std::size_t i, double t) {
        const double s = std::sqrt(cfg.m_diff * (t - stamp[i]));
        for (int k = 0; k < d; ++k) pos[i][k] += s * rng.normal();
        stamp[i] = t;
    };
    auto record = [&](double t) {
        path.times.push_back(t);
        path.mass.push_back(eps * static_cast<double>(count));
        if (cfg.track_positions) {
            for (std::size_t i = 0; i < pos.size(); ++i) diffuse(i, t);
            for (std::size_t k = 0; k < cfg.observables.size(); ++k) {
                double s = 0.0;
                for (const auto& x : pos) s += cfg.observables[k](x);
                path.observables[k].push_back(eps * s);
            }
        } else {
            for (auto& v : path.observables) v.push_back(0.0);
        }
    };
    int next_grid = 0;
    double t = t0;
    for (;;) {
        const double tg = t0 + cfg.t_end * next_grid / G;
        const double tn = count > 0 ? t + rng.exponential(law.rate * static_cast<double>(count)) : INFINITY;
        if (tn >= tg) {
            // Memorylessness: restart the branching clock at each grid time.
            t = tg;
            record(t);
            if (++next_grid > G) break;
            continue;
        }
        t = tn;
        if (++path.events > cfg.event_budget) throw std::runtime_error("branching event budget exceeded");
        const std::size_t i = rng.below(count);
        const std::size_t k = law.sample(rng);
        if (cfg.track_positions) {
            diffuse(i, t);
            const Point x = pos[i];
            if (k == 0) {
                pos[i] = pos.back();
                stamp[i] = stamp.back();
                pos.pop_back();
                stamp.pop_back();
            } else {
                for (std::size_t c = 1; c < k; ++c) {
                    pos.push_back(x);
                    stamp.push_back(t);
                }
            }
        }
        count = count + k - 1;
        if (static_cast<double>(count) > cfg.max_particles) throw std::runtime_error("population explosion budget exceeded");
    }
    path.final.dimension = d;
    path.final.particle_mass = eps;
    path.final.time = t;
    if (cfg.track_positions) path.final.positions = std::move(pos);
    return path;
}

Estimate laplace_functional(const std::vector<SbmPath>& paths, std::size_t k, std::size_t j) {
    Accumulator a;
    for (const auto& p : paths) a.add(std::exp(-p.observables.at(k).at(j)));
    return estimate(a);
}

double stable_csbp_u(double beta, double kappa, double theta, double t) {
    if (theta == 0.0) return 0.0;
    return theta * std::pow(1.0 + kappa * beta * std::pow(theta, beta) * t, -1.0 / beta);
}

CsbpReference stable_total_mass_reference(double beta, double kappa, double z0, double theta, double t,
                                          std::size_t replicates, double eps, std::uint64_t seed, int workers,
                                          std::size_t k_max) {
    CsbpReference out;
    out.reference = std::exp(-z0 * stable_csbp_u(beta, kappa, theta, t));
    if (replicates == 0) return out;
    SbmConfig cfg;
    cfg.offspring = OffspringLaw::stable(beta, kappa, eps, 0.5, k_max);
    cfg.t_end = t;
    cfg.grid_points = 1;
    cfg.seed = seed;
    cfg.track_positions = false;
    const ParticleCloud start = ParticleCloud::point_mass(1, z0, eps);
    std::vector<double> values(replicates);
    parallel_for(replicates, workers, [&](std::size_t i) {
        SbmConfig c = cfg;
        c.stream = i;
        const SbmPath p = run_sbm_particles(start, c);
        values[i] = std::exp(-theta * p.mass.back());
    });
    out.mc = estimate(values);
    out.z = z_score(out.mc.mean, out.mc.se, out.reference, 0.0);
    return out;
}

Grid1D reaction_diffusion(const Grid1D& phi, double t, double m_diff, double kappa, double beta, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("reaction_diffusion needs dt > 0");
    const long steps = std::max<long>(1, std::lround(t / dt));
    const double h = t / static_cast<double>(steps);
    auto react = [&](Grid1D& g, double s) {
        for (double& v : g.values) v = v > 0.0 ? stable_csbp_u(beta, kappa, v, s) : v;
    };
    Grid1D u = phi;
    if (t == 0.0) return u;
    react(u, 0.5 * h);
    for (long k = 0; k < steps; ++k) {
        u = heat_semigroup(u, h, m_diff);
        react(u, k + 1 < steps ? h : 0.5 * h);
    }
    return u;
}

} // namespace slfv
