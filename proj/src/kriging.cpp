/*
 * Copyright 2026 The sbo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sbo/kriging.hpp"
#include "sbo/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sbo::kriging {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNuggetFloor = 1e-10;
constexpr double kMinRcond = 1e-14;
constexpr double kSearchRcond = 1e-10;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

/// Per-dimension squared coordinate differences between all sample pairs.
class DistanceCache {
public:
    explicit DistanceCache(const MatrixXd& X) : n_(X.rows())
    {
        sq_.reserve(static_cast<std::size_t>(X.cols()));
        for (Index l = 0; l < X.cols(); ++l) {
            Eigen::ArrayXXd d = X.col(l).replicate(1, n_).array() -
                                X.col(l).transpose().replicate(n_, 1).array();
            sq_.push_back(d.square());
        }
    }

    MatrixXd correlation(const VectorXd& theta, double lambda) const
    {
        Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(n_, n_);
        for (std::size_t l = 0; l < sq_.size(); ++l) acc += theta[static_cast<Index>(l)] * sq_[l];
        MatrixXd R = (-acc).exp().matrix();
        R.diagonal().array() += lambda;
        return R;
    }

private:
    Index n_;
    std::vector<Eigen::ArrayXXd> sq_;
};

struct Factorization {
    Eigen::LLT<MatrixXd> llt;
    VectorXd weights;
    double mu = 0.0;
    double sigma2 = 0.0;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    bool ok = false;
};

Factorization factorize(const MatrixXd& R, const VectorXd& y, double min_rcond = kMinRcond)
{
    Factorization f;
    f.llt.compute(R);
    if (f.llt.info() != Eigen::Success || !(f.llt.rcond() >= min_rcond)) return f;

    const Index n = y.size();
    const VectorXd ones = VectorXd::Ones(n);
    const VectorXd r_inv_one = f.llt.solve(ones);
    const VectorXd r_inv_y = f.llt.solve(y);
    const double denom = ones.dot(r_inv_one);
    if (!(denom > 0.0)) return f;
    f.mu = ones.dot(r_inv_y) / denom;
    const VectorXd resid = y - ones * f.mu;
    f.weights = f.llt.solve(resid);
    f.sigma2 = std::max(resid.dot(f.weights) / static_cast<double>(n),
                        std::numeric_limits<double>::min());
    const MatrixXd L = f.llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    f.log_likelihood = -0.5 * static_cast<double>(n) * std::log(f.sigma2) - 0.5 * log_det;
    f.ok = std::isfinite(f.log_likelihood) && f.weights.allFinite();
    return f;
}

bool has_duplicate_rows(const MatrixXd& X)
{
    for (Index i = 0; i < X.rows(); ++i)
        for (Index j = i + 1; j < X.rows(); ++j)
            if (X.row(i) == X.row(j)) return true;
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// Design of experiments

MatrixXd random_lhs(Index n, Index m_dim, std::mt19937_64& rng)
{
    MatrixXd points(n, m_dim);
    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (Index l = 0; l < m_dim; ++l) {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Index i = 0; i < n; ++i)
            points(i, l) = (2.0 * static_cast<double>(perm[static_cast<std::size_t>(i)]) + 1.0) /
                           (2.0 * static_cast<double>(n));
    }
    return points;
}

double min_pairwise_distance(const MatrixXd& points)
{
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < points.rows(); ++i)
        for (Index j = i + 1; j < points.rows(); ++j)
            best = std::min(best, (points.row(i) - points.row(j)).norm());
    return best;
}

LhsDesign maximin_lhs(int n, int m_dim, std::uint64_t seed, int n_candidates)
{
    if (n < 2) throw Error("maximin_lhs: need at least 2 points");
    if (m_dim < 1) throw Error("maximin_lhs: need at least 1 dimension");
    if (n_candidates < 1) throw Error("maximin_lhs: need at least 1 candidate");
    std::mt19937_64 rng(seed);
    LhsDesign design;
    design.seed = seed;
    design.n_candidates = n_candidates;
    double best = -1.0;
    for (int c = 0; c < n_candidates; ++c) {
        MatrixXd candidate = random_lhs(n, m_dim, rng);
        const double dist = min_pairwise_distance(candidate);
        if (dist > best) {
            best = dist;
            design.points = std::move(candidate);
        }
    }
    return design;
}

// ---------------------------------------------------------------------------
// Model

double gaussian_correlation(const Eigen::Ref<const VectorXd>& xi, const Eigen::Ref<const VectorXd>& xj,
                            const Eigen::Ref<const VectorXd>& theta)
{
    check_dimension(static_cast<std::size_t>(xi.size()), static_cast<std::size_t>(xj.size()),
                    "gaussian_correlation");
    check_dimension(static_cast<std::size_t>(xi.size()), static_cast<std::size_t>(theta.size()),
                    "gaussian_correlation theta");
    if ((theta.array() <= 0.0).any()) throw Error("gaussian_correlation: theta must be positive");
    return std::exp(-(theta.array() * (xi - xj).array().square()).sum());
}

double concentrated_log_likelihood(const MatrixXd& X, const VectorXd& y, const HyperParams& params)
{
    const DistanceCache cache(X);
    return factorize(cache.correlation(params.theta, params.lambda), y).log_likelihood;
}

Model Model::with_params(MatrixXd X, VectorXd y, HyperParams params)
{
    if (X.rows() < 1 || X.rows() != y.size()) throw FitError("kriging fit: X and y sizes disagree");
    if (params.theta.size() != X.cols()) throw FitError("kriging fit: theta has wrong length");
    if ((params.theta.array() <= 0.0).any()) throw FitError("kriging fit: theta must be positive");
    if (params.lambda < 0.0) throw FitError("kriging fit: lambda must be non-negative");
    if (params.lambda == 0.0 && has_duplicate_rows(X))
        throw FitError("kriging fit: duplicate sample rows make R singular without regularization");

    const DistanceCache cache(X);
    Factorization f = factorize(cache.correlation(params.theta, params.lambda), y);
    if (!f.ok && params.lambda < kNuggetFloor) {
        params.lambda = kNuggetFloor;
        f = factorize(cache.correlation(params.theta, params.lambda), y);
    }
    if (!f.ok) throw FitError("kriging fit: correlation matrix is not positive definite");

    Model model;
    model.X_ = std::move(X);
    model.y_ = std::move(y);
    model.params_ = std::move(params);
    model.mu_hat_ = f.mu;
    model.sigma2_hat_ = f.sigma2;
    model.log_likelihood_ = f.log_likelihood;
    model.weights_ = std::move(f.weights);
    model.r_factor_ = std::move(f.llt);

    // sigma2_ri = w' C w / n with C = R - lambda I and R w = y - 1 mu.
    const VectorXd resid = model.y_ - VectorXd::Constant(model.y_.size(), model.mu_hat_);
    const double n = static_cast<double>(model.y_.size());
    model.sigma2_ri_ = std::max(
        0.0, (model.weights_.dot(resid) - model.params_.lambda * model.weights_.squaredNorm()) / n);

    // Plain correlation matrix for the re-interpolation error, with the smallest
    // nugget that factorizes.
    double nugget = 1e-12;
    for (; nugget <= 1e-4; nugget *= 100.0) {
        model.ri_factor_.compute(cache.correlation(model.params_.theta, nugget));
        if (model.ri_factor_.info() == Eigen::Success && model.ri_factor_.rcond() >= kMinRcond) break;
    }
    if (model.ri_factor_.info() != Eigen::Success) model.ri_factor_ = model.r_factor_;
    return model;
}

Model Model::fit(MatrixXd X, VectorXd y, const FitConfig& config)
{
    const Index n = X.rows();
    const Index m = X.cols();
    if (n < 1 || n != y.size()) throw FitError("kriging fit: X and y sizes disagree");
    if (m < 1) throw FitError("kriging fit: no input dimensions");
    if (config.n_starts < 1) throw FitError("kriging fit: need at least one start");
    if (config.fixed_lambda && *config.fixed_lambda == 0.0 && has_duplicate_rows(X))
        throw FitError("kriging fit: duplicate sample rows make R singular without regularization");

    const bool search_lambda = !config.fixed_lambda.has_value();
    const Index k = m + (search_lambda ? 1 : 0);
    VectorXd lo(k), hi(k);
    lo.head(m).setConstant(config.log10_theta_min);
    hi.head(m).setConstant(config.log10_theta_max);
    if (search_lambda) {
        lo[m] = config.log10_lambda_min;
        hi[m] = config.log10_lambda_max;
    }

    const DistanceCache cache(X);
    auto decode = [&](const VectorXd& z) {
        HyperParams p;
        p.theta = z.head(m).unaryExpr([](double v) { return std::pow(10.0, v); });
        p.lambda = search_lambda ? std::pow(10.0, z[m]) : *config.fixed_lambda;
        return p;
    };
    double min_rcond = kSearchRcond;
    auto objective = [&](const VectorXd& z) {
        const HyperParams p = decode(z);
        return factorize(cache.correlation(p.theta, p.lambda), y, min_rcond).log_likelihood;
    };

    VectorXd best_z;
    double best_f = -std::numeric_limits<double>::infinity();
    // Well-conditioned candidates first; fall back to anything that factorizes.
    for (const double rcond_floor : {kSearchRcond, kMinRcond}) {
        min_rcond = rcond_floor;
        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < config.n_starts; ++s) {
            VectorXd z(k);
            if (static_cast<std::size_t>(s) < config.warm_starts.size()) {
                const HyperParams& w = config.warm_starts[static_cast<std::size_t>(s)];
                for (Index l = 0; l < m; ++l) z[l] = std::log10(w.theta[l]);
                if (search_lambda) z[m] = std::log10(std::max(w.lambda, 1e-300));
                z = z.cwiseMax(lo).cwiseMin(hi);
            } else {
                for (Index l = 0; l < k; ++l) z[l] = lo[l] + unif(rng) * (hi[l] - lo[l]);
            }

            double f = objective(z);
            int evals = 1;
            double step = config.initial_step;
            while (step >= config.min_step && evals < config.max_evaluations_per_start) {
                bool improved = false;
                for (Index l = 0; l < k && evals < config.max_evaluations_per_start; ++l) {
                    for (double dir : {1.0, -1.0}) {
                        VectorXd trial = z;
                        trial[l] = std::clamp(z[l] + dir * step, lo[l], hi[l]);
                        if (trial[l] == z[l]) continue;
                        const double ft = objective(trial);
                        ++evals;
                        if (ft > f) {
                            z = std::move(trial);
                            f = ft;
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) step *= 0.5;
            }
            if (f > best_f) {
                best_f = f;
                best_z = z;
            }
        }
        if (std::isfinite(best_f)) break;
    }
    if (!std::isfinite(best_f))
        throw FitError("kriging fit: no hyperparameters give a positive-definite correlation matrix");
    return with_params(std::move(X), std::move(y), decode(best_z));
}

VectorXd Model::correlations(const Eigen::Ref<const VectorXd>& x) const
{
    check_dimension(static_cast<std::size_t>(dim()), static_cast<std::size_t>(x.size()),
                    "kriging predict");
    const Eigen::ArrayXXd diff = X_.rowwise() - x.transpose();
    return (-(diff.square().matrix() * params_.theta).array()).exp().matrix();
}

Prediction Model::predict(const Eigen::Ref<const VectorXd>& x) const
{
    const VectorXd psi = correlations(x);
    Prediction p;
    p.y_hat = mu_hat_ + psi.dot(weights_);
    const VectorXd v = r_factor_.matrixL().solve(psi);
    p.s2_hat = std::max(0.0, sigma2_hat_ * (1.0 + params_.lambda - v.squaredNorm()));
    return p;
}

double Model::reinterp_error(const Eigen::Ref<const VectorXd>& x) const
{
    const VectorXd psi = correlations(x);
    const VectorXd v = ri_factor_.matrixL().solve(psi);
    return std::max(0.0, sigma2_ri_ * (1.0 - v.squaredNorm()));
}

std::string Model::dump_json() const
{
    using io::format_number;
    std::ostringstream out;
    auto vec = [&](const VectorXd& v) {
        out << '[';
        for (Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_number(v[i]);
        out << ']';
    };
    out << "{\"X\":[";
    for (Index i = 0; i < X_.rows(); ++i) {
        out << (i ? "," : "");
        vec(X_.row(i).transpose());
    }
    out << "],\"y\":";
    vec(y_);
    out << ",\"theta\":";
    vec(params_.theta);
    out << ",\"lambda\":" << format_number(params_.lambda)
        << ",\"mu_hat\":" << format_number(mu_hat_)
        << ",\"sigma2_hat\":" << format_number(sigma2_hat_)
        << ",\"sigma2_ri\":" << format_number(sigma2_ri_)
        << ",\"log_likelihood\":" << format_number(log_likelihood_) << "}";
    return out.str();
}

// ---------------------------------------------------------------------------
// Infill

double expected_improvement(double y_hat, double s2, double y_min)
{
    if (!(s2 > 0.0)) return 0.0;
    const double s = std::sqrt(s2);
    const double z = (y_min - y_hat) / s;
    return std::max(0.0, s * (z * normal_cdf(z) + normal_pdf(z)));
}

double expected_improvement(const Model& model, const Eigen::Ref<const VectorXd>& x_star,
                            double y_min, bool use_reinterp)
{
    const Prediction p = model.predict(x_star);
    const double s2 = use_reinterp ? model.reinterp_error(x_star) : p.s2_hat;
    // Round-off leaves a residue of order nugget * variance at the samples.
    const double scale = use_reinterp ? model.sigma2_ri() : model.sigma2_hat();
    if (s2 <= 1e-10 * scale) return 0.0;
    return expected_improvement(p.y_hat, s2, y_min);
}

EIProposal propose_infill(const Model& model, double y_min, const FeasibleRegion& region,
                          const Bounds& bounds, const InfillConfig& config)
{
    const Index m = model.dim();
    check_dimension(bounds.dimension(), static_cast<std::size_t>(m), "propose_infill");
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto to_decision = [&](const VectorXd& u) {
        return bounds.from_unit(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
    };
    auto to_unit_vec = [&](const DecisionVector& tau) {
        const DecisionVector u = bounds.to_unit(tau);
        return VectorXd(Eigen::Map<const VectorXd>(u.data(), m));
    };
    auto feasible = [&](const VectorXd& u) {
        if ((u.array() < 0.0).any() || (u.array() > 1.0).any()) return false;
        return !region.contains || region.contains(to_decision(u));
    };
    auto repaired = [&](VectorXd u) {
        u = u.cwiseMax(0.0).cwiseMin(1.0);
        if (region.repair) u = to_unit_vec(region.repair(to_decision(u))).cwiseMax(0.0).cwiseMin(1.0);
        return u;
    };
    auto ei = [&](const VectorXd& u) { return expected_improvement(model, u, y_min, config.use_reinterp); };

    // Sample indices ordered by response, best first; anchors for local candidates.
    std::vector<Index> order(static_cast<std::size_t>(model.n()));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return model.y()[a] < model.y()[b]; });
    std::vector<VectorXd> feasible_samples;
    for (Index i : order) {
        VectorXd u = model.X().row(i).transpose();
        if (feasible(u)) feasible_samples.push_back(std::move(u));
    }

    struct Scored {
        VectorXd u;
        double ei;
    };

    for (int attempt = 0; attempt < config.max_restarts; ++attempt) {
        std::vector<Scored> pool;
        pool.reserve(static_cast<std::size_t>(config.n_candidates));
        for (int c = 0; c < config.n_candidates; ++c) {
            VectorXd u(m);
            const int kind = c % 4;
            if (kind == 0 || feasible_samples.empty()) {
                for (Index l = 0; l < m; ++l) u[l] = unif(rng);
            } else if (kind == 1 || kind == 2) {
                const std::size_t top = std::min<std::size_t>(feasible_samples.size(), 5);
                const VectorXd& anchor = feasible_samples[static_cast<std::size_t>(unif(rng) * top) % top];
                const double sigma = kind == 1 ? 0.05 : 0.2;
                for (Index l = 0; l < m; ++l) u[l] = anchor[l] + sigma * gauss(rng);
            } else {
                const std::size_t count = feasible_samples.size();
                const VectorXd& a = feasible_samples[static_cast<std::size_t>(unif(rng) * count) % count];
                const VectorXd& b = feasible_samples[static_cast<std::size_t>(unif(rng) * count) % count];
                const double w = unif(rng);
                u = w * a + (1.0 - w) * b;
            }
            u = repaired(std::move(u));
            if (feasible(u)) pool.push_back({u, ei(u)});
        }
        if (pool.empty()) continue;

        std::sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) { return a.ei > b.ei; });
        Scored best = pool.front();
        const std::size_t n_local = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(config.n_local));
        for (std::size_t s = 0; s < n_local; ++s) {
            Scored cur = pool[s];
            double step = config.initial_step;
            int evals = 0;
            while (step >= config.min_step && evals < config.local_evaluations) {
                bool improved = false;
                for (Index l = 0; l < m && evals < config.local_evaluations; ++l) {
                    for (double dir : {1.0, -1.0}) {
                        VectorXd trial = cur.u;
                        trial[l] = std::clamp(trial[l] + dir * step, 0.0, 1.0);
                        if (trial[l] == cur.u[l] || !feasible(trial)) continue;
                        const double v = ei(trial);
                        ++evals;
                        if (v > cur.ei) {
                            cur = {std::move(trial), v};
                            improved = true;
                            break;
                        }
                    }
                }
                if (!improved) step *= 0.5;
            }
            if (cur.ei > best.ei) best = cur;
        }
        return {to_decision(best.u), best.ei};
    }
    throw InfillError("propose_infill: no feasible candidate found");
}

// ---------------------------------------------------------------------------
// Validation

std::vector<LooEntry> loo_cv(const Model& model)
{
    const Index n = model.n();
    if (n < 3) throw Error("loo_cv: need at least 3 samples");
    std::vector<LooEntry> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        MatrixXd X(n - 1, model.dim());
        VectorXd y(n - 1);
        for (Index r = 0, k = 0; r < n; ++r) {
            if (r == i) continue;
            X.row(k) = model.X().row(r);
            y[k] = model.y()[r];
            ++k;
        }
        const Model reduced = Model::with_params(std::move(X), std::move(y), model.params());
        const Prediction p = reduced.predict(model.X().row(i).transpose());
        LooEntry e;
        e.observed = model.y()[i];
        e.prediction = p.y_hat;
        e.std_error = std::sqrt(p.s2_hat);
        if (e.std_error < 1e-12) {
            e.std_error = 1e-12;
            e.degenerate = true;
        }
        e.residual = (e.observed - e.prediction) / e.std_error;
        e.outside = std::abs(e.residual) > 3.0;
        out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Driver

RkResult run_rk(Evaluator& evaluator, const RkConfig& config, const FeasibleRegion* region,
                std::uint64_t seed)
{
    const Bounds& bounds = evaluator.bounds();
    const Sense sense = evaluator.sense();
    const std::size_t m = bounds.dimension();
    const std::size_t n_init = config.n_init ? config.n_init : std::max<std::size_t>(m + 1, 11);
    if (n_init < m + 1) throw ConfigError("run_rk: n_init must be at least m + 1");
    if (evaluator.remaining() < n_init) throw ConfigError("run_rk: budget smaller than the initial design");

    const FeasibleRegion everything;
    const FeasibleRegion& feasible_region = region ? *region : everything;
    auto is_feasible = [&](const DecisionVector& tau) {
        return !feasible_region.contains || feasible_region.contains(tau);
    };

    RkResult result;
    const LhsDesign design = maximin_lhs(static_cast<int>(n_init), static_cast<int>(m), seed,
                                         config.lhs_candidates);

    std::vector<VectorXd> xs;
    std::vector<double> ys;
    std::vector<bool> feasible_flags;
    auto record = [&](const DecisionVector& tau, double value) {
        const DecisionVector u = bounds.to_unit(tau);
        xs.emplace_back(Eigen::Map<const VectorXd>(u.data(), static_cast<Index>(m)));
        ys.push_back(to_minimization(sense, value));
        feasible_flags.push_back(is_feasible(tau));
    };
    for (Index i = 0; i < design.points.rows(); ++i) {
        const VectorXd row = design.points.row(i).transpose();
        const DecisionVector tau = bounds.from_unit(std::span<const double>(row.data(), m));
        const Evaluation e = evaluator.evaluate(tau);
        record(evaluator.trace().records().back().tau, e.value);
    }

    auto assemble = [&] {
        MatrixXd X(static_cast<Index>(xs.size()), static_cast<Index>(m));
        VectorXd y(static_cast<Index>(ys.size()));
        for (std::size_t i = 0; i < xs.size(); ++i) {
            X.row(static_cast<Index>(i)) = xs[i].transpose();
            y[static_cast<Index>(i)] = ys[i];
        }
        return std::pair{std::move(X), std::move(y)};
    };

    std::optional<HyperParams> previous;
    std::uint64_t round = 0;
    auto fit_current = [&] {
        FitConfig fc = config.fit;
        fc.seed = seed * 7919 + round;
        if (previous) {
            fc.warm_starts.insert(fc.warm_starts.begin(), *previous);
            fc.n_starts = 1 + config.refit_starts;
        }
        auto [X, y] = assemble();
        Model model = Model::fit(std::move(X), std::move(y), fc);
        previous = model.params();
        return model;
    };

    while (!evaluator.exhausted()) {
        const Model model = fit_current();
        double y_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ys.size(); ++i)
            if (feasible_flags[i]) y_min = std::min(y_min, ys[i]);
        if (!std::isfinite(y_min)) y_min = *std::min_element(ys.begin(), ys.end());

        InfillConfig ic = config.infill;
        ic.seed = seed * 104729 + round;
        const EIProposal proposal = propose_infill(model, y_min, feasible_region, bounds, ic);
        result.ei_history.push_back(proposal.ei_value);
        result.infill_points.push_back(proposal.point);
        const Evaluation e = evaluator.evaluate(proposal.point);
        record(evaluator.trace().records().back().tau, e.value);
        ++round;
    }

    if (config.final_diagnostics && xs.size() >= 3) {
        result.final_model = fit_current();
        try {
            result.loo = loo_cv(*result.final_model);
        } catch (const FitError&) {
            result.loo.clear();  // a leave-one-out subset can be singular; diagnostics only
        }
    }
    result.trace = evaluator.trace();
    return result;
}

} // namespace sbo::kriging
