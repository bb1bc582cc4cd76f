#pragma once

#include "netrate/data.hpp"
#include "netrate/types.hpp"

#include <optional>
#include <vector>

namespace netrate {

/// Risk-set aggregates at one (beta, t): the weighted sums of covariate
/// outer powers over the pairs in the risk set, with weights exp(beta'Z).
struct RiskSetAggregates {
    double s0 = 0.0;
    Vec s1;
    Mat s2;

    /// Weighted covariate mean s1/s0.
    Vec zbar() const { return s1 / s0; }
};

struct FitOptions {
    Vec init;                  // empty -> zeros
    double tol = 1e-8;         // on the l2 norm of the score
    int max_iter = 100;
    double beta_bound = 50.0;  // separation threshold on |beta|_inf
};

struct FitResult {
    Vec beta_hat;
    double score_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double log_pl = 0.0;
};

/// Right-continuous step function: value_at(t) = values[k] for the largest
/// times[k] <= t, and 0 before times[0].
struct StepFunction {
    std::vector<double> times;
    std::vector<double> values;

    double value_at(double t) const;
};

/// Cumulative baseline estimate: jumps (#events at s) / S0(beta, s) at the
/// distinct observed event times.
struct BaselineCurve {
    std::vector<double> jump_times;
    std::vector<double> cumulative;

    double value_at(double t) const;
};

RiskSetAggregates aggregates(const Dataset& ds, const Vec& beta, double t,
                             NodeDeletion del = {});

double log_pseudo_partial_likelihood(const Dataset& ds, const Vec& beta,
                                     NodeDeletion del = {});

Vec score(const Dataset& ds, const Vec& beta, NodeDeletion del = {});

/// Analytic -dU/dbeta': sum over events of S2/S0 - (S1/S0)^{x2}. Positive
/// semidefinite by construction.
Mat neg_hessian(const Dataset& ds, const Vec& beta, NodeDeletion del = {});

/// Damped Newton on the concave log pseudo partial likelihood. Accepted steps
/// never decrease the objective; deterministic given inputs. Throws
/// SeparationError when |beta|_inf crosses opts.beta_bound with a
/// non-vanishing score, EstimationError when the (masked) dataset has no
/// events.
FitResult fit(const Dataset& ds, const FitOptions& opts = {}, NodeDeletion del = {});

BaselineCurve breslow_baseline(const Dataset& ds, const Vec& beta, NodeDeletion del = {});

/// Residual process of one pair: N_ij(t) minus the accumulated
/// exp(beta'Z_ij) dLambda0. Jumps at the pair's event times and at the
/// baseline's jump times.
StepFunction residual_process(const Dataset& ds, const Vec& beta,
                              const BaselineCurve& baseline, int pair_index);
StepFunction residual_process(const Dataset& ds, const Vec& beta,
                              const BaselineCurve& baseline, const std::string& sender,
                              const std::string& recipient);

namespace detail {

/// Shared evaluation engine for one (dataset, deletion) view. Groups time
/// into segments on which every covariate path is constant, so the per-beta
/// cost is O(#segments x #pairs) (one segment when all paths are static).
class Engine {
public:
    Engine(const Dataset& ds, NodeDeletion del);

    int dim() const { return p_; }
    double total_events() const { return total_events_; }

    struct Eval {
        double loglik = 0.0;
        Vec score;
        Mat neg_hess;
    };

    /// One pass computing the objective, score and curvature. Throws
    /// EstimationError on exponent overflow (|beta'Z| > 700).
    Eval eval(const Vec& beta, bool want_score, bool want_hess) const;

    /// Objective only; nullopt instead of throwing on overflow (used for
    /// trial steps inside the line search).
    std::optional<double> try_loglik(const Vec& beta) const;

    RiskSetAggregates aggregates_at(const Vec& beta, double t) const;

    /// Sum over events of (Z_event - zbar)^{x2} at beta (the outer-product
    /// curvature surrogate used by the variance module).
    Mat event_outer_products(const Vec& beta) const;

    /// Distinct event times with multiplicities and S0 at each (for the
    /// baseline estimator).
    void baseline_jumps(const Vec& beta, std::vector<double>* times,
                        std::vector<double>* increments) const;

private:
    int segment_of(double t) const;  // left-limit convention
    void segment_sums(const Vec& beta, int seg, double* s0, Vec* s1, Mat* s2,
                      double* max_exponent) const;

    const Dataset* ds_;
    NodeDeletion del_;
    int p_ = 0;
    std::vector<int> alive_;                 // pair indices in the view
    std::vector<double> seg_starts_;         // global covariate breakpoints
    double total_events_ = 0.0;
    // per segment: event count, sum of event covariates, sum of event ZZ'
    std::vector<double> seg_event_count_;
    std::vector<Vec> seg_event_zsum_;
    std::vector<Mat> seg_event_zzsum_;
    // distinct event times (ascending) with multiplicities and segment index
    std::vector<double> distinct_times_;
    std::vector<double> distinct_mult_;
    std::vector<int> distinct_seg_;
};

}  // namespace detail

}  // namespace netrate
