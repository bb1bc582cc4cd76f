#include "netrate/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netrate {

double StepFunction::value_at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 0.0;
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double BaselineCurve::value_at(double t) const {
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    if (it == jump_times.begin()) return 0.0;
    return cumulative[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

namespace detail {

namespace {
constexpr double kExpLimit = 700.0;
}

Engine::Engine(const Dataset& ds, NodeDeletion del) : ds_(&ds), del_(del), p_(ds.dim()) {
    const auto& pairs = ds.pairs();
    alive_.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (del.keeps(pairs[i])) alive_.push_back(static_cast<int>(i));

    // Global segment grid: one segment when every path is static, otherwise
    // the union of all segment starts among alive pairs.
    if (ds.all_static()) {
        seg_starts_ = {0.0};
    } else {
        seg_starts_.push_back(0.0);
        for (int idx : alive_) {
            const auto& st = pairs[idx].covariates.starts;
            seg_starts_.insert(seg_starts_.end(), st.begin(), st.end());
        }
        std::sort(seg_starts_.begin(), seg_starts_.end());
        seg_starts_.erase(std::unique(seg_starts_.begin(), seg_starts_.end()),
                          seg_starts_.end());
    }
    int n_seg = static_cast<int>(seg_starts_.size());

    seg_event_count_.assign(n_seg, 0.0);
    seg_event_zsum_.assign(n_seg, Vec::Zero(p_));
    seg_event_zzsum_.assign(n_seg, Mat::Zero(p_, p_));

    std::vector<std::pair<double, int>> all_events;  // (time, pair idx)
    for (int idx : alive_) {
        for (double t : pairs[idx].events) all_events.emplace_back(t, idx);
    }
    std::sort(all_events.begin(), all_events.end());
    total_events_ = static_cast<double>(all_events.size());

    for (const auto& [t, idx] : all_events) {
        int seg = segment_of(t);
        const Vec& z = pairs[idx].covariates.left_limit(t);
        seg_event_count_[seg] += 1.0;
        seg_event_zsum_[seg] += z;
        seg_event_zzsum_[seg] += z * z.transpose();
        if (distinct_times_.empty() || t != distinct_times_.back()) {
            distinct_times_.push_back(t);
            distinct_mult_.push_back(1.0);
            distinct_seg_.push_back(seg);
        } else {
            distinct_mult_.back() += 1.0;
        }
    }
}

int Engine::segment_of(double t) const {
    if (seg_starts_.size() == 1) return 0;
    // left-limit convention: the segment in force just before t
    auto it = std::lower_bound(seg_starts_.begin(), seg_starts_.end(), t);
    if (it == seg_starts_.begin()) return 0;
    return static_cast<int>(it - seg_starts_.begin()) - 1;
}

void Engine::segment_sums(const Vec& beta, int seg, double* s0, Vec* s1, Mat* s2,
                          double* max_exponent) const {
    const auto& pairs = ds_->pairs();
    const double seg_time = seg_starts_[seg];

    double shift = -std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    std::vector<double> exponents(alive_.size());
    std::vector<const Vec*> zs(alive_.size());
    for (std::size_t k = 0; k < alive_.size(); ++k) {
        const auto& path = pairs[alive_[k]].covariates;
        const Vec& z = path.is_static() ? path.values.front() : path.at(seg_time);
        zs[k] = &z;
        double x = beta.dot(z);
        exponents[k] = x;
        shift = std::max(shift, x);
        max_abs = std::max(max_abs, std::fabs(x));
    }
    if (max_exponent) *max_exponent = max_abs;

    double acc0 = 0.0;
    Vec acc1 = s1 ? Vec::Zero(p_).eval() : Vec();
    Mat acc2 = s2 ? Mat::Zero(p_, p_).eval() : Mat();
    for (std::size_t k = 0; k < alive_.size(); ++k) {
        double w = std::exp(exponents[k] - shift);
        acc0 += w;
        if (s1) acc1 += w * (*zs[k]);
        if (s2) acc2 += w * (*zs[k]) * zs[k]->transpose();
    }
    // Return sums with the shift re-applied on s0 only via its logarithm
    // elsewhere; here report unshifted values scaled back.
    *s0 = acc0 * std::exp(shift);
    if (s1) *s1 = acc1 * std::exp(shift);
    if (s2) *s2 = acc2 * std::exp(shift);
}

Engine::Eval Engine::eval(const Vec& beta, bool want_score, bool want_hess) const {
    if (beta.size() != p_) throw EstimationError("beta has wrong dimension");
    if (total_events_ == 0.0)
        throw EstimationError("log pseudo partial likelihood undefined: no events");

    Eval out;
    out.loglik = 0.0;
    if (want_score) out.score = Vec::Zero(p_);
    if (want_hess) out.neg_hess = Mat::Zero(p_, p_);

    const auto& pairs = ds_->pairs();
    const int n_seg = static_cast<int>(seg_starts_.size());
    for (int seg = 0; seg < n_seg; ++seg) {
        if (seg_event_count_[seg] == 0.0) continue;
        const double seg_time = seg_starts_[seg];

        double shift = -std::numeric_limits<double>::infinity();
        double max_abs = 0.0;
        double acc0 = 0.0;
        Vec acc1 = Vec::Zero(p_);
        Mat acc2 = want_hess ? Mat::Zero(p_, p_).eval() : Mat();

        // two passes: find the shift, then accumulate stabilized weights
        std::vector<double> exponents(alive_.size());
        for (std::size_t k = 0; k < alive_.size(); ++k) {
            const auto& path = pairs[alive_[k]].covariates;
            const Vec& z = path.is_static() ? path.values.front() : path.at(seg_time);
            double x = beta.dot(z);
            exponents[k] = x;
            shift = std::max(shift, x);
            max_abs = std::max(max_abs, std::fabs(x));
        }
        if (max_abs > kExpLimit)
            throw EstimationError(
                "exponent overflow in risk-set aggregates (|beta'Z| > 700): "
                "rescale covariates or bound beta");
        for (std::size_t k = 0; k < alive_.size(); ++k) {
            const auto& path = pairs[alive_[k]].covariates;
            const Vec& z = path.is_static() ? path.values.front() : path.at(seg_time);
            double w = std::exp(exponents[k] - shift);
            acc0 += w;
            acc1 += w * z;
            if (want_hess) acc2 += w * z * z.transpose();
        }

        const double d = seg_event_count_[seg];
        const double log_s0 = shift + std::log(acc0);
        out.loglik += beta.dot(seg_event_zsum_[seg]) - d * log_s0;
        if (want_score || want_hess) {
            Vec zbar = acc1 / acc0;
            if (want_score) out.score += seg_event_zsum_[seg] - d * zbar;
            if (want_hess)
                out.neg_hess += d * (acc2 / acc0 - zbar * zbar.transpose());
        }
    }
    if (want_hess) out.neg_hess = 0.5 * (out.neg_hess + out.neg_hess.transpose()).eval();
    return out;
}

std::optional<double> Engine::try_loglik(const Vec& beta) const {
    try {
        Eval e = eval(beta, false, false);
        if (!std::isfinite(e.loglik)) return std::nullopt;
        return e.loglik;
    } catch (const EstimationError&) {
        return std::nullopt;
    }
}

RiskSetAggregates Engine::aggregates_at(const Vec& beta, double t) const {
    if (beta.size() != p_) throw EstimationError("beta has wrong dimension");
    const auto& pairs = ds_->pairs();
    RiskSetAggregates agg;
    agg.s1 = Vec::Zero(p_);
    agg.s2 = Mat::Zero(p_, p_);

    double shift = -std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    std::vector<double> exponents(alive_.size());
    std::vector<const Vec*> zs(alive_.size());
    for (std::size_t k = 0; k < alive_.size(); ++k) {
        const Vec& z = pairs[alive_[k]].covariates.left_limit(t);
        zs[k] = &z;
        double x = beta.dot(z);
        exponents[k] = x;
        shift = std::max(shift, x);
        max_abs = std::max(max_abs, std::fabs(x));
    }
    if (alive_.empty()) return agg;
    if (max_abs > kExpLimit)
        throw EstimationError(
            "exponent overflow in risk-set aggregates (|beta'Z| > 700): "
            "rescale covariates or bound beta");

    double acc0 = 0.0;
    Vec acc1 = Vec::Zero(p_);
    Mat acc2 = Mat::Zero(p_, p_);
    for (std::size_t k = 0; k < alive_.size(); ++k) {
        double w = std::exp(exponents[k] - shift);
        acc0 += w;
        acc1 += w * (*zs[k]);
        acc2 += w * (*zs[k]) * zs[k]->transpose();
    }
    const double scale = std::exp(shift);
    agg.s0 = acc0 * scale;
    agg.s1 = acc1 * scale;
    agg.s2 = acc2 * scale;
    return agg;
}

Mat Engine::event_outer_products(const Vec& beta) const {
    if (total_events_ == 0.0) return Mat::Zero(p_, p_);
    Mat out = Mat::Zero(p_, p_);
    const int n_seg = static_cast<int>(seg_starts_.size());
    for (int seg = 0; seg < n_seg; ++seg) {
        const double d = seg_event_count_[seg];
        if (d == 0.0) continue;
        double s0;
        Vec s1;
        double max_abs;
        segment_sums(beta, seg, &s0, &s1, nullptr, &max_abs);
        if (max_abs > kExpLimit)
            throw EstimationError(
                "exponent overflow in risk-set aggregates (|beta'Z| > 700): "
                "rescale covariates or bound beta");
        Vec zbar = s1 / s0;
        out += seg_event_zzsum_[seg] - seg_event_zsum_[seg] * zbar.transpose() -
               zbar * seg_event_zsum_[seg].transpose() + d * zbar * zbar.transpose();
    }
    return 0.5 * (out + out.transpose()).eval();
}

void Engine::baseline_jumps(const Vec& beta, std::vector<double>* times,
                            std::vector<double>* increments) const {
    times->clear();
    increments->clear();
    times->reserve(distinct_times_.size());
    increments->reserve(distinct_times_.size());

    // S0 per segment is constant; compute lazily per needed segment.
    std::vector<double> seg_s0(seg_starts_.size(), -1.0);
    for (std::size_t k = 0; k < distinct_times_.size(); ++k) {
        int seg = distinct_seg_[k];
        if (seg_s0[seg] < 0.0) {
            double s0;
            double max_abs;
            segment_sums(beta, seg, &s0, nullptr, nullptr, &max_abs);
            if (max_abs > kExpLimit)
                throw EstimationError(
                    "exponent overflow in risk-set aggregates (|beta'Z| > 700): "
                    "rescale covariates or bound beta");
            seg_s0[seg] = s0;
        }
        times->push_back(distinct_times_[k]);
        increments->push_back(distinct_mult_[k] / seg_s0[seg]);
    }
}

}  // namespace detail

RiskSetAggregates aggregates(const Dataset& ds, const Vec& beta, double t, NodeDeletion del) {
    if (t < 0.0 || t > ds.horizon())
        throw EstimationError("aggregates time outside the observation window");
    detail::Engine engine(ds, del);
    return engine.aggregates_at(beta, t);
}

double log_pseudo_partial_likelihood(const Dataset& ds, const Vec& beta, NodeDeletion del) {
    detail::Engine engine(ds, del);
    return engine.eval(beta, false, false).loglik;
}

Vec score(const Dataset& ds, const Vec& beta, NodeDeletion del) {
    detail::Engine engine(ds, del);
    if (engine.total_events() == 0.0) return Vec::Zero(ds.dim());  // empty sum
    return engine.eval(beta, true, false).score;
}

Mat neg_hessian(const Dataset& ds, const Vec& beta, NodeDeletion del) {
    detail::Engine engine(ds, del);
    if (engine.total_events() == 0.0) return Mat::Zero(ds.dim(), ds.dim());
    return engine.eval(beta, true, true).neg_hess;
}

namespace {

FitResult fit_with_engine(const detail::Engine& engine, const FitOptions& opts) {
    const int p = engine.dim();
    if (opts.tol <= 0) throw EstimationError("fit tolerance must be positive");

    Vec beta = opts.init.size() == 0 ? Vec::Zero(p).eval() : opts.init;
    if (beta.size() != p) throw EstimationError("init has wrong dimension");

    FitResult res;
    detail::Engine::Eval cur = engine.eval(beta, true, true);

    // A monotone likelihood drives beta to infinity while the score decays
    // exponentially, so a fit can "converge" numerically far outside any
    // plausible coefficient scale. Both exits are declared separation: the
    // score still alive beyond beta_bound, or a numerical root beyond a
    // quarter of it.
    const double implausible = opts.beta_bound / 4.0;

    for (int iter = 0; iter <= opts.max_iter; ++iter) {
        res.iterations = iter;
        res.score_norm = cur.score.norm();
        if (res.score_norm <= opts.tol) {
            if (beta.lpNorm<Eigen::Infinity>() > implausible)
                throw SeparationError(
                    "monotone likelihood: score vanished at |beta| = " +
                    std::to_string(beta.lpNorm<Eigen::Infinity>()) +
                    ", beyond the plausible coefficient scale");
            res.converged = true;
            break;
        }
        if (beta.lpNorm<Eigen::Infinity>() > opts.beta_bound)
            throw SeparationError(
                "monotone likelihood: |beta| exceeded " + std::to_string(opts.beta_bound) +
                " with score norm " + std::to_string(res.score_norm));
        if (iter == opts.max_iter) break;

        // Newton direction; fall back to the gradient when the curvature
        // solve fails or does not give an ascent direction.
        Vec dir;
        Eigen::LDLT<Mat> ldlt(cur.neg_hess);
        if (ldlt.info() == Eigen::Success) {
            dir = ldlt.solve(cur.score);
            if (!dir.allFinite() || dir.dot(cur.score) <= 0.0) dir.resize(0);
        }
        if (dir.size() == 0) dir = cur.score / (1.0 + cur.score.norm());

        // step halving: accept only if the objective does not decrease
        double step = 1.0;
        bool accepted = false;
        const double floor = cur.loglik - 1e-12 * (1.0 + std::fabs(cur.loglik));
        for (int h = 0; h < 60; ++h) {
            Vec trial = beta + step * dir;
            auto ll = engine.try_loglik(trial);
            if (ll && *ll >= floor) {
                beta = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no admissible step; report non-convergence
        cur = engine.eval(beta, true, true);
    }

    res.beta_hat = beta;
    res.log_pl = cur.loglik;
    res.score_norm = cur.score.norm();
    res.converged = res.score_norm <= opts.tol;
    return res;
}

}  // namespace

FitResult fit(const Dataset& ds, const FitOptions& opts, NodeDeletion del) {
    detail::Engine engine(ds, del);
    return fit_with_engine(engine, opts);
}

BaselineCurve breslow_baseline(const Dataset& ds, const Vec& beta, NodeDeletion del) {
    detail::Engine engine(ds, del);
    BaselineCurve curve;
    std::vector<double> increments;
    engine.baseline_jumps(beta, &curve.jump_times, &increments);
    curve.cumulative.resize(increments.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < increments.size(); ++k) {
        acc += increments[k];
        curve.cumulative[k] = acc;
    }
    return curve;
}

StepFunction residual_process(const Dataset& ds, const Vec& beta,
                              const BaselineCurve& baseline, const std::string& sender,
                              const std::string& recipient) {
    int idx = ds.pair_index(sender, recipient);
    if (idx < 0)
        throw ValidationError("pair not in dataset: " + sender + " -> " + recipient);
    return residual_process(ds, beta, baseline, idx);
}

StepFunction residual_process(const Dataset& ds, const Vec& beta,
                              const BaselineCurve& baseline, int pair_index) {
    if (pair_index < 0 || pair_index >= static_cast<int>(ds.pairs().size()))
        throw ValidationError("pair index out of range");
    const PairData& pair = ds.pairs()[pair_index];

    // merge event jumps (+1) with baseline jumps (-w dLambda)
    StepFunction out;
    std::size_t ie = 0, ib = 0;
    double value = 0.0;
    double prev_cum = 0.0;
    while (ie < pair.events.size() || ib < baseline.jump_times.size()) {
        double te = ie < pair.events.size() ? pair.events[ie]
                                            : std::numeric_limits<double>::infinity();
        double tb = ib < baseline.jump_times.size() ? baseline.jump_times[ib]
                                                    : std::numeric_limits<double>::infinity();
        double t = std::min(te, tb);
        if (tb <= t) {
            double d_lambda = baseline.cumulative[ib] - prev_cum;
            prev_cum = baseline.cumulative[ib];
            double w = std::exp(beta.dot(pair.covariates.left_limit(t)));
            value -= w * d_lambda;
            ++ib;
        }
        if (te <= t) {
            value += 1.0;
            ++ie;
        }
        if (!out.times.empty() && out.times.back() == t)
            out.values.back() = value;
        else {
            out.times.push_back(t);
            out.values.push_back(value);
        }
    }
    return out;
}

}  // namespace netrate
