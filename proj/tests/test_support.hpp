#pragma once

// Shared helpers for the test suites: compact dataset builders, a random
// small-dataset generator, and independent reference implementations
// (brute-force summation, finite differences) used as oracles. Nothing here
// may call into the library's aggregate/likelihood internals beyond the
// public construction API.

#include "netrate/data.hpp"
#include "netrate/estimation.hpp"

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace testsup {

using netrate::CovariatePath;
using netrate::CovariateSet;
using netrate::Dataset;
using netrate::EventLog;
using netrate::LabelPair;
using netrate::Mat;
using netrate::NodeSet;
using netrate::Vec;

struct PairSpec {
    std::string sender;
    std::string recipient;
    Vec z;                        // static covariate
    std::vector<double> events;  // may be empty
};

/// Builds a dataset with static covariates from per-pair specs.
inline Dataset make_dataset(const std::vector<std::string>& labels,
                            const std::vector<PairSpec>& specs, double horizon) {
    EventLog log;
    log.horizon = horizon;
    CovariateSet covs;
    covs.dim = specs.empty() ? 1 : static_cast<int>(specs.front().z.size());
    for (const auto& s : specs) {
        covs.paths.emplace(LabelPair{s.sender, s.recipient},
                           CovariatePath::constant(s.z));
        if (!s.events.empty()) log.events[{s.sender, s.recipient}] = s.events;
    }
    return Dataset::build(NodeSet(labels), log, covs);
}

/// The two-pair scalar dataset used throughout the examples: pair A with
/// covariate 1 and n_a events, pair B with covariate 0 and n_b events.
inline Dataset two_pair_dataset(int n_a, int n_b, double horizon = 10.0) {
    std::vector<double> ev_a, ev_b;
    for (int k = 1; k <= n_a; ++k) ev_a.push_back(k * 0.5);
    for (int k = 1; k <= n_b; ++k) ev_b.push_back(k * 0.7 + 0.1);
    return make_dataset({"a", "b"},
                        {{"a", "b", (Vec(1) << 1.0).finished(), ev_a},
                         {"b", "a", (Vec(1) << 0.0).finished(), ev_b}},
                        horizon);
}

/// Random dataset over n <= 6 nodes with p static covariates and at most
/// max_events events; all ordered pairs get a covariate path, events land on
/// random pairs at distinct times.
inline Dataset random_dataset(std::mt19937_64& rng, int n, int p, int max_events,
                              double horizon = 1.0) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back("v" + std::to_string(i + 1));

    std::vector<PairSpec> specs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Vec z(p);
            for (int k = 0; k < p; ++k) z(k) = normal(rng);
            specs.push_back({labels[i], labels[j], z, {}});
        }

    std::uniform_int_distribution<int> pair_pick(0, static_cast<int>(specs.size()) - 1);
    std::uniform_int_distribution<int> n_events(1, max_events);
    int events = n_events(rng);
    std::map<int, std::vector<double>> times;
    for (int e = 0; e < events; ++e)
        times[pair_pick(rng)].push_back((1.0 - unif(rng)) * horizon);
    for (auto& [idx, ts] : times) {
        std::sort(ts.begin(), ts.end());
        for (std::size_t k = 1; k < ts.size(); ++k)
            if (ts[k] <= ts[k - 1]) ts[k] = std::nextafter(ts[k - 1], 2.0 * horizon);
        specs[idx].events = ts;
    }
    return make_dataset(labels, specs, horizon);
}

inline Vec random_beta(std::mt19937_64& rng, int p, double scale = 0.7) {
    std::normal_distribution<double> normal;
    Vec b(p);
    for (int k = 0; k < p; ++k) b(k) = scale * normal(rng);
    return b;
}

/// Independent reference: the log pseudo partial likelihood via direct
/// double summation in extended precision. Only touches the public data
/// model, never the library's evaluation engine.
inline long double ref_loglik(const Dataset& ds, const Vec& beta) {
    long double total = 0.0L;
    for (const auto& pd_ev : ds.pairs()) {
        for (double t : pd_ev.events) {
            long double s0 = 0.0L;
            for (const auto& pd : ds.pairs()) {
                const Vec& z = pd.covariates.left_limit(t);
                long double x = 0.0L;
                for (int k = 0; k < z.size(); ++k)
                    x += static_cast<long double>(beta(k)) * z(k);
                s0 += std::exp(x);
            }
            const Vec& z_ev = pd_ev.covariates.left_limit(t);
            long double x_ev = 0.0L;
            for (int k = 0; k < z_ev.size(); ++k)
                x_ev += static_cast<long double>(beta(k)) * z_ev(k);
            total += x_ev - std::log(s0);
        }
    }
    return total;
}

/// Central finite difference of the log pseudo partial likelihood.
inline Vec fd_score(const Dataset& ds, const Vec& beta, double h = 1e-6) {
    const int p = static_cast<int>(beta.size());
    Vec g(p);
    for (int k = 0; k < p; ++k) {
        Vec up = beta, dn = beta;
        up(k) += h;
        dn(k) -= h;
        g(k) = (netrate::log_pseudo_partial_likelihood(ds, up) -
                netrate::log_pseudo_partial_likelihood(ds, dn)) /
               (2.0 * h);
    }
    return g;
}

/// Central finite difference of the score (column r differentiates in
/// direction r); returns the negated Jacobian.
inline Mat fd_neg_hessian(const Dataset& ds, const Vec& beta, double h = 1e-6) {
    const int p = static_cast<int>(beta.size());
    Mat out(p, p);
    for (int k = 0; k < p; ++k) {
        Vec up = beta, dn = beta;
        up(k) += h;
        dn(k) -= h;
        Vec d = (netrate::score(ds, up) - netrate::score(ds, dn)) / (2.0 * h);
        out.col(k) = -d;
    }
    return 0.5 * (out + out.transpose()).eval();
}

inline double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

inline double rel_err_mat(const Mat& got, const Mat& want) {
    double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace testsup
