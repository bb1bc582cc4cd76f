#include "netrate/simulation.hpp"

#include "netrate/csv.hpp"
#include "netrate/estimation.hpp"
#include "netrate/parallel.hpp"
#include "netrate/rng.hpp"
#include "netrate/stats.hpp"
#include "netrate/variance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace netrate {

std::string to_string(CovariateRegime r) {
    return r == CovariateRegime::independent_senders ? "independent_senders"
                                                     : "dependent_senders";
}

CovariateRegime covariate_regime_from_string(const std::string& s) {
    if (s == "independent_senders" || s == "independent")
        return CovariateRegime::independent_senders;
    if (s == "dependent_senders" || s == "dependent")
        return CovariateRegime::dependent_senders;
    throw ConfigError("unknown covariate regime: " + s);
}

void SimulationConfig::validate() const {
    if (n < 2) throw ConfigError("simulation needs n >= 2");
    if (beta0.size() != 3) throw ConfigError("beta0 must have length 3 (the 3-covariate design)");
    if (!(rho >= 0.0 && rho < 1.0))
        throw ConfigError("compound-symmetric correlation requires rho in [0, 1)");
    if (rho > 0.5)
        throw ConfigError(
            "banded correlation (bandwidth 1) is not positive definite for rho > 0.5");
    if (!(frailty_shape > 0.0 && frailty_rate > 0.0))
        throw ConfigError("frailty shape and rate must be positive");
    // a non-unit frailty mean is confounded with the baseline rates
    if (std::fabs(frailty_shape / frailty_rate - 1.0) > 1e-12)
        throw ConfigError("frailty mean (shape/rate) must equal 1");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(expected_events_cap > 0.0)) throw ConfigError("event cap must be positive");
}

namespace {

std::vector<std::string> node_labels(int n) {
    std::vector<std::string> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = std::to_string(i + 1);
    return labels;
}

/// Lexicographic (sender-major) ordered-pair list; fixes the N-vector
/// ordering used by the dependent regime.
std::vector<std::pair<int, int>> ordered_pairs(int n) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) pairs.emplace_back(i, j);
    return pairs;
}

/// Compound-symmetric Gaussian via the one-factor representation
/// sqrt(rho) W + sqrt(1-rho) eps.
std::vector<double> gaussian_compound_symmetric(std::mt19937_64& rng, std::size_t m,
                                                double rho) {
    std::normal_distribution<double> normal;
    double w = normal(rng);
    std::vector<double> out(m);
    const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
    for (auto& v : out) v = a * w + b * normal(rng);
    return out;
}

/// Gaussian with tridiagonal correlation (1 on the diagonal, rho at lag 1)
/// via the bidiagonal Cholesky factor.
std::vector<double> gaussian_banded(std::mt19937_64& rng, std::size_t m, double rho) {
    std::normal_distribution<double> normal;
    std::vector<double> out(m);
    if (m == 0) return out;
    double prev_diag = 1.0;
    double prev_g = normal(rng);
    out[0] = prev_g;
    for (std::size_t k = 1; k < m; ++k) {
        double off = rho / prev_diag;
        double diag_sq = 1.0 - off * off;
        if (!(diag_sq > 0.0))
            throw ConfigError(
                "banded correlation (bandwidth 1) is not positive definite at this rho");
        double diag = std::sqrt(diag_sq);
        double g = normal(rng);
        out[k] = off * prev_g + diag * g;
        prev_diag = diag;
        prev_g = g;
    }
    return out;
}

}  // namespace

CovariateSet gen_covariates(const SimulationConfig& config) {
    config.validate();
    const int n = config.n;
    const auto pairs = ordered_pairs(n);
    const std::size_t N = pairs.size();
    SeedSequence seeds(config.seed);

    // z1: thresholded Gaussian, z2: Uniform(0,1), z3: banded Gaussian
    std::vector<double> z1(N), z2(N), z3(N);

    if (config.regime == CovariateRegime::independent_senders) {
        // one (n-1)-vector per sender, recipients in index order
        for (int i = 0; i < n; ++i) {
            auto rng1 = make_engine(seeds.stream("cov-z1-sender", i));
            auto g = gaussian_compound_symmetric(rng1, n - 1, config.rho);
            auto rng3 = make_engine(seeds.stream("cov-z3-sender", i));
            auto b = gaussian_banded(rng3, n - 1, config.rho);
            int k = 0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                std::size_t a = static_cast<std::size_t>(i) * (n - 1) + k;
                z1[a] = g[k] >= 0.0 ? 1.0 : 0.0;
                z3[a] = b[k];
                ++k;
            }
        }
    } else {
        auto rng1 = make_engine(seeds.stream("cov-z1-global"));
        auto g = gaussian_compound_symmetric(rng1, N, config.rho);
        auto rng3 = make_engine(seeds.stream("cov-z3-global"));
        auto b = gaussian_banded(rng3, N, config.rho);
        for (std::size_t a = 0; a < N; ++a) {
            z1[a] = g[a] >= 0.0 ? 1.0 : 0.0;
            z3[a] = b[a];
        }
    }
    {
        auto rng2 = make_engine(seeds.stream("cov-z2"));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (std::size_t a = 0; a < N; ++a) z2[a] = unif(rng2);
    }

    const auto labels = node_labels(n);
    CovariateSet cs;
    cs.dim = 3;
    for (std::size_t a = 0; a < N; ++a) {
        Vec z(3);
        z << z1[a], z2[a], z3[a];
        cs.paths.emplace(LabelPair{labels[pairs[a].first], labels[pairs[a].second]},
                         CovariatePath::constant(std::move(z)));
    }
    return cs;
}

EventLog gen_events(const SimulationConfig& config, const CovariateSet& covariates,
                    SimTruth* truth) {
    config.validate();
    const int n = config.n;
    const auto labels = node_labels(n);
    const auto pairs = ordered_pairs(n);
    SeedSequence seeds(config.seed);

    Vec eta(n);
    {
        auto rng = make_engine(seeds.stream("frailty"));
        std::gamma_distribution<double> gamma(config.frailty_shape,
                                              1.0 / config.frailty_rate);
        for (int i = 0; i < n; ++i) eta(i) = gamma(rng);
    }

    std::vector<double> rates(pairs.size());
    double expected_total = 0.0;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        auto [i, j] = pairs[a];
        auto it = covariates.paths.find({labels[i], labels[j]});
        if (it == covariates.paths.end())
            throw ValidationError("covariates must cover all ordered pairs: missing " +
                                  labels[i] + " -> " + labels[j]);
        const Vec& z = it->second.values.front();
        rates[a] = eta(i) * config.baseline_rate(i) * std::exp(config.beta0.dot(z));
        expected_total += rates[a] * config.horizon;
    }
    if (expected_total > config.expected_events_cap)
        throw ConfigError("expected event count " + std::to_string(expected_total) +
                          " exceeds the cap; reduce the horizon or beta0");

    EventLog log;
    log.horizon = config.horizon;
    const double T = config.horizon;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
        auto rng = make_engine(seeds.stream("events-pair", a));
        std::poisson_distribution<long> pois(rates[a] * T);
        long count = pois(rng);
        if (count <= 0) continue;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> times(count);
        for (long k = 0; k < count; ++k) times[k] = (1.0 - unif(rng)) * T;  // in (0, T]
        std::sort(times.begin(), times.end());
        for (std::size_t k = 1; k < times.size(); ++k)  // break exact ties (prob ~ 0)
            if (times[k] <= times[k - 1])
                times[k] = std::nextafter(times[k - 1], std::numeric_limits<double>::max());
        while (!times.empty() && times.back() > T) times.pop_back();
        if (times.empty()) continue;
        log.events.emplace(LabelPair{labels[pairs[a].first], labels[pairs[a].second]},
                           std::move(times));
    }

    if (truth) {
        truth->eta = eta;
        truth->pair_rates = rates;
        truth->pair_index = pairs;
    }
    return log;
}

Dataset simulate_dataset(const SimulationConfig& config, SimTruth* truth) {
    CovariateSet covs = gen_covariates(config);
    EventLog log = gen_events(config, covs, truth);
    return Dataset::build(NodeSet(node_labels(config.n)), log, covs);
}

namespace {

struct RepOutcome {
    bool ok = false;
    std::string error;
    Vec beta;
    Vec se_naive, se_jk1, se_jk2;
};

}  // namespace

McSummary mc_study(const SimulationConfig& config, int replications, const McOptions& opts) {
    config.validate();
    if (replications < 2) throw ConfigError("mc_study needs at least 2 replications");
    const int p = static_cast<int>(config.beta0.size());
    SeedSequence seeds(config.seed);

    std::vector<RepOutcome> outcomes(replications);
    std::atomic<int> done{0};
    std::mutex progress_mutex;

    parallel_for(replications, opts.threads, [&](int r) {
        RepOutcome& out = outcomes[r];
        try {
            SimulationConfig rep_config = config;
            rep_config.seed = seeds.stream("replication", static_cast<std::uint64_t>(r));
            Dataset ds = simulate_dataset(rep_config);

            FitOptions fopts;
            fopts.tol = opts.fit_tol;
            fopts.max_iter = opts.fit_max_iter;
            FitResult fr = fit(ds, fopts);
            if (!fr.converged) throw EstimationError("fit did not converge");

            JackknifeOptions jk;
            jk.tol = opts.fit_tol;
            jk.max_iter = opts.fit_max_iter;
            jk.threads = 1;  // parallelism lives at the replication level here

            bool s1_deficient = false;
            Mat s1 = sigma1_hat(ds, fr.beta_hat, &s1_deficient);
            if (s1_deficient) throw SingularMatrixError("sigma1 rank deficient");
            Mat v_naive = sandwich(s1, s1);
            Mat s2_jk1 = sigma2_jackknife1(ds, fr.beta_hat, jk);
            Mat v_jk1 = sandwich(s1, s2_jk1);
            Mat s2_jk2 = sigma2_jackknife2(ds, fr.beta_hat, opts.jk2_draws,
                                           SeedSequence(rep_config.seed).stream("jk2"), jk);
            Mat v_jk2 = sandwich(s1, s2_jk2);

            out.beta = fr.beta_hat;
            out.se_naive = v_naive.diagonal().cwiseMax(0.0).cwiseSqrt();
            out.se_jk1 = v_jk1.diagonal().cwiseMax(0.0).cwiseSqrt();
            out.se_jk2 = v_jk2.diagonal().cwiseMax(0.0).cwiseSqrt();
            out.ok = true;
        } catch (const std::exception& e) {
            out.error = e.what();
        }
        int d = done.fetch_add(1) + 1;
        if (opts.progress) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            opts.progress(d, replications);
        }
    });

    McSummary summary;
    summary.replications_requested = replications;
    std::vector<const RepOutcome*> good;
    for (const auto& o : outcomes)
        if (o.ok) good.push_back(&o);
    summary.replications_used = static_cast<int>(good.size());
    summary.failures = replications - summary.replications_used;
    if (good.size() < 2) throw EstimationError("mc_study: fewer than 2 usable replications");

    const double z = norm_quantile(1.0 - opts.alpha / 2.0);
    const double m = static_cast<double>(good.size());
    summary.coefficients.resize(p);
    for (int r = 0; r < p; ++r) {
        double mean = 0.0;
        for (auto* o : good) mean += o->beta(r);
        mean /= m;
        double ss = 0.0;
        for (auto* o : good) ss += (o->beta(r) - mean) * (o->beta(r) - mean);

        McCoefficientSummary& c = summary.coefficients[r];
        c.bias = mean - config.beta0(r);
        c.se = std::sqrt(ss / (m - 1.0));
        for (auto* o : good) {
            c.see += o->se_naive(r);
            c.see_jk += o->se_jk1(r);
            c.see_jk2 += o->se_jk2(r);
            double err = std::fabs(o->beta(r) - config.beta0(r));
            c.ecp += err <= z * o->se_naive(r) ? 1.0 : 0.0;
            c.ecp_jk += err <= z * o->se_jk1(r) ? 1.0 : 0.0;
            c.ecp_jk2 += err <= z * o->se_jk2(r) ? 1.0 : 0.0;
        }
        c.see /= m;
        c.see_jk /= m;
        c.see_jk2 /= m;
        c.ecp /= m;
        c.ecp_jk /= m;
        c.ecp_jk2 /= m;
    }
    if (summary.failures > opts.max_failure_fraction * replications)
        throw McPartialFailure("mc_study: " + std::to_string(summary.failures) + " of " +
                                   std::to_string(replications) + " replications failed",
                               summary);
    return summary;
}

std::string mc_summary_csv(const McSummary& summary) {
    std::ostringstream os;
    os << "coefficient,bias,se,see_jk,see_jk2,see,ecp_jk,ecp_jk2,ecp,replications,failures\n";
    for (std::size_t r = 0; r < summary.coefficients.size(); ++r) {
        const auto& c = summary.coefficients[r];
        os << "beta" << (r + 1) << ',' << format_double(c.bias) << ',' << format_double(c.se)
           << ',' << format_double(c.see_jk) << ',' << format_double(c.see_jk2) << ','
           << format_double(c.see) << ',' << format_double(c.ecp_jk) << ','
           << format_double(c.ecp_jk2) << ',' << format_double(c.ecp) << ','
           << summary.replications_used << ',' << summary.failures << '\n';
    }
    return os.str();
}

}  // namespace netrate
