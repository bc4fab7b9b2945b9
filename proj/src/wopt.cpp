#include "ttwopt/wopt.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "parallel.hpp"

namespace ttwopt {

namespace {

void validate_rank_chain(const Shape& shape, const std::vector<index_t>& ranks) {
    if (static_cast<index_t>(ranks.size()) != shape.order() + 1)
        throw std::invalid_argument("rank chain must have length N+1 = " +
                                    std::to_string(shape.order() + 1) + ", got " +
                                    std::to_string(ranks.size()));
    if (ranks.front() != 1 || ranks.back() != 1)
        throw std::invalid_argument("border TT-ranks must be 1");
    for (index_t r : ranks)
        if (r < 1) throw std::invalid_argument("TT-ranks must be positive");
}

}  // namespace

ObservedProblem::ObservedProblem(DenseTensor x, DenseTensor w)
    : x_(std::move(x)), w_(std::move(w)) {
    if (x_.shape() != w_.shape())
        throw std::invalid_argument("ObservedProblem: x is " + x_.shape().str() +
                                    " but w is " + w_.shape().str());
    y_ = DenseTensor(x_.shape());
    double sum = 0.0, sum_sq = 0.0;
    for (index_t i = 0, n = x_.size(); i < n; ++i) {
        const double wi = w_[i];
        if (wi != 0.0 && wi != 1.0)
            throw std::invalid_argument("ObservedProblem: weight entries must be exactly 0 or 1");
        if (wi != 0.0) {
            const double v = x_[i];
            y_[i] = v;
            ++n_observed_;
            sum += v;
            sum_sq += v * v;
        }
    }
    half_y_norm2_ = 0.5 * sum_sq;
    if (n_observed_ > 0) {
        const double n = static_cast<double>(n_observed_);
        observed_mean_ = sum / n;
        const double var = sum_sq / n - observed_mean_ * observed_mean_;
        observed_std_ = var > 0.0 ? std::sqrt(var) : 0.0;
    }
}

void OptimizerConfig::validate() const {
    if (max_iters < 0) throw std::invalid_argument("OptimizerConfig: max_iters must be >= 0");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("OptimizerConfig: rel_tol must be > 0");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("OptimizerConfig: grad_tol must be > 0");
    if (init.kind == InitScheme::Kind::Gaussian) {
        if (init.sigma && !(*init.sigma >= 0.0))
            throw std::invalid_argument("OptimizerConfig: init sigma must be >= 0");
    } else if (!(init.lo <= init.hi)) {
        throw std::invalid_argument("OptimizerConfig: uniform init needs lo <= hi");
    }
}

std::string termination_name(Termination t) {
    switch (t) {
        case Termination::IterationBudget: return "iteration budget";
        case Termination::ObjectiveTolerance: return "objective tolerance";
        case Termination::GradientTolerance: return "gradient tolerance";
        case Termination::LineSearchFailure: return "line search failure";
        case Termination::ZeroGradient: return "zero gradient";
        case Termination::Diverged: return "diverged";
    }
    return "unknown";
}

TTCores init_cores(const Shape& shape, const std::vector<index_t>& ranks,
                   const OptimizerConfig& config) {
    config.validate();
    validate_rank_chain(shape, ranks);
    std::mt19937_64 rng(config.seed);
    std::vector<DenseTensor> cores;
    cores.reserve(static_cast<std::size_t>(shape.order()));
    for (index_t n = 1; n <= shape.order(); ++n) {
        DenseTensor core(Shape{ranks[static_cast<std::size_t>(n - 1)], shape.dim(n),
                               ranks[static_cast<std::size_t>(n)]});
        if (config.init.kind == InitScheme::Kind::Gaussian) {
            const double sigma = config.init.sigma.value_or(1.0);
            if (sigma > 0.0) {
                std::normal_distribution<double> dist(0.0, sigma);
                for (auto& v : core.values()) v = dist(rng);
            }
        } else {
            std::uniform_real_distribution<double> dist(config.init.lo, config.init.hi);
            for (auto& v : core.values()) v = dist(rng);
        }
        cores.push_back(std::move(core));
    }
    return TTCores(std::move(cores));
}

double init_sigma_heuristic(const ObservedProblem& p, const std::vector<index_t>& ranks) {
    validate_rank_chain(p.shape(), ranks);
    const index_t n_modes = p.shape().order();
    double interior = 1.0;
    for (index_t n = 1; n < n_modes; ++n) interior *= static_cast<double>(ranks[static_cast<std::size_t>(n)]);
    double scale = p.observed_std();
    if (scale <= 0.0) scale = std::max(std::abs(p.observed_mean()), 1.0);
    return std::pow(scale / std::sqrt(interior), 1.0 / static_cast<double>(n_modes));
}

namespace {

// Expanded objective given the unmasked reconstruction; entries with w = 0
// contribute nothing to either inner product.
double objective_from_reconstruction(const ObservedProblem& p, const std::vector<double>& xhat) {
    const double* w = p.w().data();
    const double* y = p.y().data();
    double y_dot_z = 0.0, z_norm2 = 0.0;
    for (index_t i = 0, n = p.x().size(); i < n; ++i) {
        if (w[i] != 0.0) {
            const double z = xhat[static_cast<std::size_t>(i)];
            y_dot_z += y[i] * z;
            z_norm2 += z * z;
        }
    }
    return p.half_y_norm2() - y_dot_z + 0.5 * z_norm2;
}

struct FgResult {
    double f = 0.0;
    GradientSet g;
};

// Objective and all core gradients in one sweep: forward chain gives the
// reconstruction, backward chain the right subchains, then per mode the
// masked residual D is contracted as L_n^T * D_(JL x In*JR) followed by
// * R_n^T, landing directly in the core-shaped gradient buffer.
FgResult eval_fg(const ObservedProblem& p, const TTCores& tt) {
    const index_t n_modes = tt.order();
    const Shape& shape = tt.shape();
    const std::vector<Matrix> lefts = detail::left_chain_matrices(tt);
    const std::vector<Matrix> rights = detail::right_chain_matrices(tt);

    const Matrix& recon = lefts[static_cast<std::size_t>(n_modes)];  // (prod I) x 1
    const double* xhat = recon.data();

    FgResult out;
    {
        const double* w = p.w().data();
        const double* y = p.y().data();
        double y_dot_z = 0.0, z_norm2 = 0.0;
        for (index_t i = 0, n = p.x().size(); i < n; ++i) {
            if (w[i] != 0.0) {
                const double z = xhat[i];
                y_dot_z += y[i] * z;
                z_norm2 += z * z;
            }
        }
        out.f = p.half_y_norm2() - y_dot_z + 0.5 * z_norm2;
    }

    // masked residual Z - Y = W * (Xhat - X)
    std::vector<double> resid(static_cast<std::size_t>(p.x().size()));
    {
        const double* w = p.w().data();
        const double* x = p.x().data();
        double* d = resid.data();
        parallel_for(p.x().size(), [&](index_t lo, index_t hi) {
            for (index_t i = lo; i < hi; ++i) d[i] = w[i] != 0.0 ? xhat[i] - x[i] : 0.0;
        });
    }

    out.g.grads.reserve(static_cast<std::size_t>(n_modes));
    index_t below = 1;
    for (index_t n = 1; n <= n_modes; ++n) {
        const index_t mid = shape.dim(n);
        const index_t above = shape.count() / (below * mid);
        const index_t r_left = tt.rank(n - 1);
        const index_t r_right = tt.rank(n);

        // the colexicographic residual buffer reads as (below) x (mid*above)
        Eigen::Map<const Matrix> d_mat(resid.data(), below, mid * above);
        Matrix t1 = lefts[static_cast<std::size_t>(n - 1)].transpose() * d_mat;  // r_left x (mid*above)
        DenseTensor grad(Shape{r_left, mid, r_right});
        Eigen::Map<Matrix> g_mat(grad.data(), r_left * mid, r_right);
        Eigen::Map<const Matrix> t1_mat(t1.data(), r_left * mid, above);
        g_mat.noalias() = t1_mat * rights[static_cast<std::size_t>(n)].transpose();
        out.g.grads.push_back(std::move(grad));
        below *= mid;
    }
    return out;
}

double dot(const GradientSet& a, const GradientSet& b) {
    double acc = 0.0;
    for (std::size_t n = 0; n < a.grads.size(); ++n) {
        const double* pa = a.grads[n].data();
        const double* pb = b.grads[n].data();
        for (index_t i = 0, m = a.grads[n].size(); i < m; ++i) acc += pa[i] * pb[i];
    }
    return acc;
}

// out = base + t * dir, written into preallocated cores of matching shape
void apply_step(const TTCores& base, const GradientSet& dir, double t, TTCores& out) {
    for (index_t n = 1; n <= base.order(); ++n) {
        const double* pb = base.core(n).data();
        const double* pd = dir.grads[static_cast<std::size_t>(n - 1)].data();
        double* po = out.core(n).data();
        for (index_t i = 0, m = base.core(n).size(); i < m; ++i) po[i] = pb[i] + t * pd[i];
    }
}

}  // namespace

double objective(const ObservedProblem& p, const TTCores& tt) {
    if (tt.shape() != p.shape())
        throw std::invalid_argument("objective: tt shape " + tt.shape().str() +
                                    " does not match problem shape " + p.shape().str());
    return objective_from_reconstruction(p, full(tt).values());
}

GradientSet gradient(const ObservedProblem& p, const TTCores& tt) {
    if (tt.shape() != p.shape())
        throw std::invalid_argument("gradient: tt shape " + tt.shape().str() +
                                    " does not match problem shape " + p.shape().str());
    return eval_fg(p, tt).g;
}

std::pair<TTCores, OptimizerTrace> optimize(const ObservedProblem& p,
                                            const std::vector<index_t>& ranks,
                                            const OptimizerConfig& config) {
    config.validate();
    validate_rank_chain(p.shape(), ranks);

    OptimizerConfig resolved = config;
    if (resolved.init.kind == InitScheme::Kind::Gaussian && !resolved.init.sigma)
        resolved.init.sigma = init_sigma_heuristic(p, ranks);

    return optimize(p, init_cores(p.shape(), ranks, resolved), config);
}

std::pair<TTCores, OptimizerTrace> optimize(const ObservedProblem& p, TTCores initial,
                                            const OptimizerConfig& config) {
    config.validate();
    if (initial.shape() != p.shape())
        throw std::invalid_argument("optimize: core shapes do not match the problem");
    if (p.shape().count() > kFullElementCap)
        throw std::invalid_argument("optimize: problem exceeds the materialization cap");

    TTCores tt = std::move(initial);
    OptimizerTrace trace;

    FgResult fg = eval_fg(p, tt);
    trace.initial_f = fg.f;
    if (!std::isfinite(fg.f)) {
        trace.termination = Termination::Diverged;
        return {std::move(tt), std::move(trace)};
    }

    const double n_params = static_cast<double>(num_params(tt));
    double g_dot_g = dot(fg.g, fg.g);
    double gnorm = std::sqrt(g_dot_g);
    if (config.max_iters == 0) {
        trace.termination = Termination::IterationBudget;
        return {std::move(tt), std::move(trace)};
    }
    if (gnorm == 0.0) {
        trace.termination = Termination::ZeroGradient;
        return {std::move(tt), std::move(trace)};
    }

    const bool ncg = config.method == OptimMethod::ConjugateGradient;
    constexpr double kArmijoC = 1e-4;
    constexpr int kMaxHalvings = 60;

    GradientSet dir = fg.g;
    for (auto& d : dir.grads)
        for (auto& v : d.values()) v = -v;
    double dir_deriv = -g_dot_g;

    TTCores trial = tt;
    double f = fg.f;
    double step_init = 1.0;
    trace.termination = Termination::IterationBudget;

    for (index_t iter = 1; iter <= config.max_iters; ++iter) {
        double step = step_init;
        double f_trial = 0.0;
        bool accepted = false;
        bool restarted = false;
        while (true) {
            for (int h = 0; h < kMaxHalvings; ++h) {
                apply_step(tt, dir, step, trial);
                f_trial = objective_from_reconstruction(p, full(trial).values());
                if (std::isfinite(f_trial) && f_trial <= f + kArmijoC * step * dir_deriv) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (accepted || restarted || !ncg) break;
            // retry once along steepest descent
            restarted = true;
            dir = fg.g;
            for (auto& d : dir.grads)
                for (auto& v : d.values()) v = -v;
            dir_deriv = -g_dot_g;
            step = step_init;
        }
        if (!accepted) {
            trace.termination = Termination::LineSearchFailure;
            break;
        }

        std::swap(tt, trial);
        FgResult fg_new = eval_fg(p, tt);
        if (!std::isfinite(fg_new.f)) {
            trace.termination = Termination::Diverged;
            break;
        }
        const double g_dot_g_new = dot(fg_new.g, fg_new.g);
        const double gnorm_new = std::sqrt(g_dot_g_new);
        trace.records.push_back({iter, fg_new.f, gnorm_new, step});

        if (std::abs(fg_new.f - f) / std::max(f, 1e-300) < config.rel_tol) {
            trace.termination = Termination::ObjectiveTolerance;
            f = fg_new.f;
            break;
        }
        if (gnorm_new / n_params < config.grad_tol) {
            trace.termination = Termination::GradientTolerance;
            f = fg_new.f;
            break;
        }

        if (ncg) {
            // Polak-Ribiere+ with restart on loss of descent
            double beta = (g_dot_g_new - dot(fg_new.g, fg.g)) / g_dot_g;
            if (!(beta > 0.0)) beta = 0.0;
            for (index_t n = 1; n <= tt.order(); ++n) {
                double* pd = dir.grads[static_cast<std::size_t>(n - 1)].data();
                const double* pg = fg_new.g.grads[static_cast<std::size_t>(n - 1)].data();
                for (index_t i = 0, m = tt.core(n).size(); i < m; ++i)
                    pd[i] = -pg[i] + beta * pd[i];
            }
            dir_deriv = dot(dir, fg_new.g);
            if (dir_deriv >= 0.0) {
                dir = fg_new.g;
                for (auto& d : dir.grads)
                    for (auto& v : d.values()) v = -v;
                dir_deriv = -g_dot_g_new;
            }
        } else {
            dir = fg_new.g;
            for (auto& d : dir.grads)
                for (auto& v : d.values()) v = -v;
            dir_deriv = -g_dot_g_new;
        }

        f = fg_new.f;
        fg = std::move(fg_new);
        g_dot_g = g_dot_g_new;
        gnorm = gnorm_new;
        if (gnorm == 0.0) {
            trace.termination = Termination::ZeroGradient;
            break;
        }
        step_init = std::min(step * 2.0, 1e12);
    }

    return {std::move(tt), std::move(trace)};
}

DenseTensor complete(const ObservedProblem& p, const TTCores& tt) {
    if (tt.shape() != p.shape())
        throw std::invalid_argument("complete: tt shape " + tt.shape().str() +
                                    " does not match problem shape " + p.shape().str());
    DenseTensor xhat = full(tt);
    DenseTensor out(p.shape());
    const double* w = p.w().data();
    const double* x = p.x().data();
    const double* m = xhat.data();
    double* po = out.data();
    parallel_for(out.size(), [&](index_t lo, index_t hi) {
        for (index_t i = lo; i < hi; ++i) po[i] = w[i] != 0.0 ? x[i] : m[i];
    });
    return out;
}

}  // namespace ttwopt
