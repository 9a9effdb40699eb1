#include "slfv/semigroup.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <boost/math/distributions/poisson.hpp>

#include "slfv/geometry.hpp"

namespace slfv {

Grid1D Grid1D::sample(const std::function<double(double)>& f, double lo, double hi, double h) {
    if (!(h > 0.0) || !(hi >= lo)) throw std::invalid_argument("Grid1D::sample needs h > 0 and lo <= hi");
    Grid1D g;
    g.origin = lo;
    g.h = h;
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / h + 1e-9)) + 1;
    g.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.values[i] = f(g.x(i));
    return g;
}

double Grid1D::interpolate(double x) const {
    if (values.empty()) return 0.0;
    const double u = (x - origin) / h;
    if (u < 0.0 || u > static_cast<double>(values.size() - 1)) return 0.0;
    const auto k = std::min(static_cast<std::size_t>(u), values.size() - 1);
    if (k + 1 >= values.size()) return values[k];
    const double s = u - static_cast<double>(k);
    return (1.0 - s) * values[k] + s * values[k + 1];
}

double Grid1D::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * h;
}

double Grid1D::sup() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
}

void Grid1D::validate() const {
    if (!(h > 0.0)) throw std::invalid_argument("Grid1D: spacing must be positive");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("Grid1D: non-finite value");
}

double sup_distance(const Grid1D& a, const Grid1D& b) {
    if (a.size() != b.size() || a.h != b.h || a.origin != b.origin)
        throw std::invalid_argument("sup_distance: grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a.values[i] - b.values[i]));
    return s;
}

std::function<double(double)> grid_antiderivative(const Grid1D& g) {
    auto cum = std::make_shared<std::vector<double>>(g.size(), 0.0);
    for (std::size_t i = 1; i < g.size(); ++i) (*cum)[i] = (*cum)[i - 1] + 0.5 * g.h * (g.values[i - 1] + g.values[i]);
    auto vals = std::make_shared<std::vector<double>>(g.values);
    const double origin = g.origin, h = g.h;
    return [cum, vals, origin, h](double x) {
        const std::size_t n = vals->size();
        if (n == 0) return 0.0;
        const double u = (x - origin) / h;
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(n - 1)) return cum->back();
        const auto k = static_cast<std::size_t>(u);
        const double s = u - static_cast<double>(k);
        const double a = (*vals)[k], b = (*vals)[k + 1];
        return (*cum)[k] + h * s * (a + 0.5 * s * (b - a));
    };
}

Grid1D heat_semigroup(const Grid1D& phi, double t, double m_diff) {
    phi.validate();
    if (t < 0.0 || m_diff < 0.0) throw std::invalid_argument("heat_semigroup needs t >= 0 and m >= 0");
    if (t == 0.0 || m_diff == 0.0) return phi;
    const double sigma = std::sqrt(m_diff * t);
    const int reach = static_cast<int>(std::ceil(12.0 * sigma / phi.h));
    std::vector<double> k(2 * static_cast<std::size_t>(reach) + 1);
    double total = 0.0;
    for (int j = -reach; j <= reach; ++j) {
        const double y = j * phi.h / sigma;
        k[static_cast<std::size_t>(j + reach)] = std::exp(-0.5 * y * y);
        total += k[static_cast<std::size_t>(j + reach)];
    }
    for (double& v : k) v /= total;
    Grid1D out = phi;
    const long n = static_cast<long>(phi.size());
    for (long i = 0; i < n; ++i) {
        double s = 0.0;
        const long jlo = std::max<long>(-reach, -i);
        const long jhi = std::min<long>(reach, n - 1 - i);
        for (long j = jlo; j <= jhi; ++j) s += k[static_cast<std::size_t>(j + reach)] * phi.values[static_cast<std::size_t>(i + j)];
        out.values[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

namespace {

double triangle_cdf(double y, double rho) {
    const double w = 2.0 * rho;
    if (y <= -w) return 0.0;
    if (y >= w) return 1.0;
    if (y <= 0.0) return (y + w) * (y + w) / (2.0 * w * w);
    return 1.0 - (w - y) * (w - y) / (2.0 * w * w);
}

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Zero-extended application of a symmetric jump kernel semigroup in Fourier space.
class FourierSemigroup {
public:
    FourierSemigroup(const JumpKernel& jk, std::size_t n, double t, double tol, int max_terms, TruncationReport& rep)
        : n_(n) {
        namespace bm = boost::math;
        const double lt = jk.rate * t;
        rep.lambda_t = lt;
        long n_lo = 0, n_hi = 0;
        if (lt > 0.0) {
            bm::poisson_distribution<double> pois(lt);
            n_hi = static_cast<long>(bm::quantile(bm::complement(pois, tol)));
            n_lo = lt > 50.0 ? static_cast<long>(bm::quantile(pois, tol)) : 0;
            n_lo = std::max<long>(0, std::min(n_lo, n_hi));
            rep.truncation_bound = bm::cdf(bm::complement(pois, static_cast<double>(n_hi))) +
                                   (n_lo > 0 ? bm::cdf(pois, static_cast<double>(n_lo - 1)) : 0.0);
        }
        if (n_hi - n_lo > max_terms) throw std::runtime_error("compound Poisson truncation budget exceeded");
        rep.terms = static_cast<int>(n_hi - n_lo + 1);
        // Displacement spread: jumps have variance ≤ (2ρ)², so 12 standard deviations plus one jump.
        double var = 0.0;
        for (std::size_t i = 0; i < jk.kernel.size(); ++i) {
            const double j = static_cast<double>(static_cast<long>(i) - jk.reach);
            var += jk.kernel[i] * j * j;
        }
        const long by_count = static_cast<long>(jk.reach) * std::max<long>(n_hi, 1);
        const long by_spread = static_cast<long>(std::ceil(12.0 * std::sqrt(lt * var))) + 4 * jk.reach;
        pad_ = static_cast<std::size_t>(std::min(by_count, by_spread)) + 1;
        rep.padding = static_cast<int>(pad_);
        len_ = n_ + 2 * pad_;
        len_ = ((len_ + 63) / 64) * 64;
        spec_ = len_ / 2 + 1;
        real_ = fftw_alloc_real(len_);
        cplx_ = fftw_alloc_complex(spec_);
        {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex());
            fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(len_), real_, cplx_, FFTW_ESTIMATE);
            inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(len_), cplx_, real_, FFTW_ESTIMATE);
        }
        std::fill(real_, real_ + len_, 0.0);
        for (std::size_t i = 0; i < jk.kernel.size(); ++i) {
            const long j = static_cast<long>(i) - jk.reach;
            real_[static_cast<std::size_t>((j % static_cast<long>(len_) + static_cast<long>(len_)) % static_cast<long>(len_))] +=
                jk.kernel[i];
        }
        fftw_execute(fwd_);
        mult_.resize(spec_);
        std::vector<double> coef;
        if (lt > 0.0) {
            for (long k = n_lo; k <= n_hi; ++k)
                coef.push_back(std::exp(static_cast<double>(k) * std::log(lt) - lt - std::lgamma(static_cast<double>(k) + 1.0)));
        } else {
            coef.push_back(1.0);
        }
        for (std::size_t w = 0; w < spec_; ++w) {
            const std::complex<double> z(cplx_[w][0], cplx_[w][1]);
            std::complex<double> acc = 0.0;
            for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * z + *it;
            if (n_lo > 0) acc *= std::pow(z, static_cast<double>(n_lo));
            mult_[w] = acc / static_cast<double>(len_);
        }
    }

    ~FourierSemigroup() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(cplx_);
    }
    FourierSemigroup(const FourierSemigroup&) = delete;
    FourierSemigroup& operator=(const FourierSemigroup&) = delete;

    void apply(std::vector<double>& v) {
        std::fill(real_, real_ + len_, 0.0);
        std::copy(v.begin(), v.end(), real_ + pad_);
        fftw_execute(fwd_);
        for (std::size_t w = 0; w < spec_; ++w) {
            const std::complex<double> z = std::complex<double>(cplx_[w][0], cplx_[w][1]) * mult_[w];
            cplx_[w][0] = z.real();
            cplx_[w][1] = z.imag();
        }
        fftw_execute(inv_);
        std::copy(real_ + pad_, real_ + pad_ + n_, v.begin());
    }

private:
    std::size_t n_;
    std::size_t pad_ = 0;
    std::size_t len_ = 0;
    std::size_t spec_ = 0;
    double* real_ = nullptr;
    fftw_complex* cplx_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
    std::vector<std::complex<double>> mult_;
};

} // namespace

JumpKernel lineage_jump_kernel(const EventLaw& law, const ScalingParams& p, double h, int radius_order) {
    if (p.dimension != 1) throw std::invalid_argument("lineage_jump_kernel is defined in d=1");
    const auto nodes = radius_quadrature(law, p, radius_order);
    double rho_max = 0.0;
    for (const auto& nd : nodes) rho_max = std::max(rho_max, nd.r / p.m_space);
    JumpKernel jk;
    jk.reach = static_cast<int>(std::ceil(2.0 * rho_max / h + 0.5));
    jk.kernel.assign(2 * static_cast<std::size_t>(jk.reach) + 1, 0.0);
    for (const auto& nd : nodes) {
        const double rho = nd.r / p.m_space;
        const double q = p.n_rate * law.impact(nd.r, p) * 2.0 * nd.r * nd.weight;
        jk.rate += q;
        for (int j = -jk.reach; j <= jk.reach; ++j) {
            const double pr = triangle_cdf((j + 0.5) * h, rho) - triangle_cdf((j - 0.5) * h, rho);
            jk.kernel[static_cast<std::size_t>(j + jk.reach)] += q * pr;
        }
    }
    if (jk.rate > 0.0)
        for (double& v : jk.kernel) v /= jk.rate;
    return jk;
}

Grid1D compound_poisson_semigroup(const Grid1D& phi, double t, const EventLaw& law, const ScalingParams& p,
                                  TruncationReport* report, double tol, int max_terms) {
    phi.validate();
    if (t < 0.0) throw std::invalid_argument("compound_poisson_semigroup needs t >= 0");
    TruncationReport rep;
    if (t == 0.0) {
        if (report) *report = rep;
        return phi;
    }
    const JumpKernel jk = lineage_jump_kernel(law, p, phi.h);
    FourierSemigroup S(jk, phi.size(), t, tol, max_terms, rep);
    Grid1D out = phi;
    S.apply(out.values);
    if (report) *report = rep;
    return out;
}

BranchingOperator::BranchingOperator(const ScalingParams& p, const EventLaw& law)
    : beta_([&] {
          if (law.is_fixed()) throw std::invalid_argument("BranchingOperator needs a variable-radius law");
          const auto& v = law.variable_radius();
          const double gd = v.gamma - p.dimension;
          if (!(gd > 0.0)) throw std::invalid_argument("BranchingOperator needs γ > d");
          const double b = (v.alpha + 1.0) / gd - 1.0;
          if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("BranchingOperator needs (α+1)/(γ−d) − 1 in (0,1)");
          return b;
      }()),
      pref_(0.0), lo_(0.0), hi_(0.0), g_(beta_) {
    const auto& v = law.variable_radius();
    const int d = p.dimension;
    const double c = p.k_density * unit_ball_volume(d) / (p.j_impact * std::pow(p.m_space, d));
    lo_ = c;
    hi_ = c * std::pow(p.j_impact, (v.gamma - d) / v.gamma);
    pref_ = p.n_rate * std::pow(p.m_space, d) / (p.k_density * (v.gamma - d)) * std::pow(c, beta_ + 1.0);
}

double BranchingOperator::operator()(double phi) const {
    if (!(phi > 0.0)) return 0.0;
    return pref_ * std::pow(phi, beta_ + 1.0) * (g_(hi_ * phi) - g_(lo_ * phi));
}

double BranchingOperator::bound_constant() const { return pref_ * g_.total(); }

namespace {

EvolutionSolution solve_v_once(const Grid1D& phi, double t_end, const EventLaw& law, const ScalingParams& p,
                               const VEquationOptions& opt) {
    const long steps = std::max<long>(1, std::lround(t_end / opt.dt));
    const double dt = t_end / static_cast<double>(steps);
    EvolutionSolution sol;
    const JumpKernel jk = lineage_jump_kernel(law, p, phi.h);
    FourierSemigroup S(jk, phi.size(), dt, 1e-16, 2000000, sol.truncation);
    std::unique_ptr<BranchingOperator> B;
    if (opt.branching) B = std::make_unique<BranchingOperator>(p, law);
    auto apply_B = [&](const std::vector<double>& v, std::vector<double>& out) {
        out.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = B ? (*B)(v[i]) : 0.0;
    };
    const int snaps = std::max(opt.snapshots, 2);
    std::vector<long> snap_steps;
    for (int k = 0; k < snaps; ++k) snap_steps.push_back(std::lround(static_cast<double>(steps) * k / (snaps - 1)));
    std::size_t next_snap = 0;
    Grid1D v = phi;
    auto store = [&](long step) {
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            sol.times.push_back(dt * static_cast<double>(step));
            sol.fields.push_back(v);
            ++next_snap;
        }
    };
    store(0);
    std::vector<double> bv, base, next, bnext;
    for (long s = 1; s <= steps; ++s) {
        apply_B(v.values, bv);
        base.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) base[i] = v.values[i] - 0.5 * dt * bv[i];
        S.apply(base);
        // Explicit Euler predictor, then trapezoidal Picard corrections.
        next = base;
        if (B) {
            for (std::size_t i = 0; i < next.size(); ++i) next[i] -= 0.5 * dt * bv[i];
            int it = 0;
            for (;; ++it) {
                if (it >= opt.max_picard) throw std::runtime_error("Picard iteration did not converge");
                apply_B(next, bnext);
                double change = 0.0;
                for (std::size_t i = 0; i < next.size(); ++i) {
                    const double nv = base[i] - 0.5 * dt * bnext[i];
                    change = std::max(change, std::abs(nv - next[i]));
                    next[i] = nv;
                }
                if (change < opt.picard_tol) break;
            }
            sol.max_picard_iterations = std::max(sol.max_picard_iterations, it + 1);
        }
        v.values.swap(next);
        store(s);
    }
    return sol;
}

} // namespace

EvolutionSolution solve_v_equation(const Grid1D& phi, double t_end, const EventLaw& law, const ScalingParams& p,
                                   double beta, const VEquationOptions& opt) {
    phi.validate();
    if (p.dimension != 1) throw std::invalid_argument("solve_v_equation is defined in d=1");
    for (double v : phi.values)
        if (v < 0.0) throw std::invalid_argument("solve_v_equation needs φ >= 0");
    if (opt.branching) {
        const BranchingOperator B(p, law);
        if (std::abs(B.exponent() - beta) > 1e-9) throw std::invalid_argument("β does not match (α+1)/(γ−d) − 1");
    }
    EvolutionSolution sol = solve_v_once(phi, t_end, law, p, opt);
    if (opt.richardson) {
        VEquationOptions half = opt;
        half.dt = opt.dt / 2.0;
        half.snapshots = 2;
        const EvolutionSolution fine = solve_v_once(phi, t_end, law, p, half);
        sol.richardson_gap = sup_distance(sol.fields.back(), fine.fields.back());
    }
    return sol;
}

namespace {

ScalarFn power_antiderivative(const TestFunction& phi, double exponent) {
    const double lo = std::isfinite(phi.extent_lo) ? phi.extent_lo : -50.0;
    const double hi = std::isfinite(phi.extent_hi) ? phi.extent_hi : 50.0;
    const ScalarFn f = phi.derivative1d[0];
    return tabulate_antiderivative([f, exponent](double x) { return std::pow(std::max(f(x), 0.0), exponent); }, lo, hi,
                                   4096);
}

} // namespace

double limit_exponential_drift(const Intervals1D& w, double K, const TestFunction& phi, const LimitParams& lp) {
    if (w.empty()) return 0.0;
    if (!phi.has_antiderivatives()) throw std::invalid_argument("limit_exponential_drift needs a d=1 test function");
    const double value = K * w.integrate(phi.antiderivative1d[0]);
    const double lap = K * w.integrate(phi.derivative1d[1]);
    const double branch = K * w.integrate(power_antiderivative(phi, 1.0 + lp.beta));
    return (-0.5 * lp.m_diff * lap + lp.kappa_generator * branch) * std::exp(-value);
}

double limit_exponential_drift(const Lattice& w, double K, const TestFunction& phi, const LimitParams& lp) {
    const double cell = w.cell_volume();
    double value = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        const Point x = w.cell_center(i);
        const double f = phi.eval(x);
        value += K * cell * w[i] * f;
        drift += K * cell * w[i] * (-0.5 * lp.m_diff * phi.laplacian(x) + lp.kappa_generator * std::pow(f, 1.0 + lp.beta));
    }
    return drift * std::exp(-value);
}

FiniteVariancePair limit_finite_variance_pair(const Intervals1D& w, double K, const TestFunction& phi,
                                              const LimitParams& lp) {
    FiniteVariancePair out;
    if (w.empty()) return out;
    out.drift = 0.5 * lp.m_diff * K * w.integrate(phi.derivative1d[1]);
    out.qv_rate = 2.0 * lp.kappa * K * w.integrate(power_antiderivative(phi, 2.0));
    return out;
}

} // namespace slfv
