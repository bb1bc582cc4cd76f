#include <doctest.h>

#include "test_support.hpp"

#include "netrate/estimation.hpp"

#include <cmath>
#include <random>

using namespace netrate;
using testsup::make_dataset;
using testsup::two_pair_dataset;

TEST_CASE("aggregates: equal weights at beta = 0") {
    Dataset ds = two_pair_dataset(1, 0);
    auto agg = aggregates(ds, Vec::Zero(1), 0.5);
    CHECK(agg.s0 == doctest::Approx(2.0));
    CHECK(agg.s1(0) == doctest::Approx(1.0));
    CHECK(agg.zbar()(0) == doctest::Approx(0.5));
}

TEST_CASE("aggregates: softmax limit pushes zbar to the max covariate") {
    Dataset ds = two_pair_dataset(1, 0);
    auto agg = aggregates(ds, (Vec(1) << 30.0).finished(), 0.5);
    CHECK(agg.zbar()(0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("aggregates: direct arithmetic at beta = log 3") {
    Dataset ds = two_pair_dataset(1, 0);
    auto agg = aggregates(ds, (Vec(1) << std::log(3.0)).finished(), 0.5);
    // (0*1 + 1*3) / (1 + 3)
    CHECK(agg.zbar()(0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("aggregates: s2 - s1 s1'/s0 is positive semidefinite") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        Dataset ds = testsup::random_dataset(rng, 4, 2, 10);
        Vec beta = testsup::random_beta(rng, 2);
        auto agg = aggregates(ds, beta, 0.3);
        Mat m = agg.s2 - agg.s1 * agg.s1.transpose() / agg.s0;
        Eigen::SelfAdjointEigenSolver<Mat> es(m);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, m.trace()));
    }
}

TEST_CASE("aggregates: overflow guard advises rescaling") {
    Dataset ds = two_pair_dataset(1, 0);
    CHECK_THROWS_AS(aggregates(ds, (Vec(1) << 800.0).finished(), 0.5), EstimationError);
}

TEST_CASE("log pseudo partial likelihood: identical covariates make it constant") {
    Vec z = (Vec(1) << 0.4).finished();
    Dataset ds = make_dataset(
        {"a", "b", "c"},
        {{"a", "b", z, {0.5, 1.5}}, {"b", "a", z, {0.7}}, {"a", "c", z, {}},
         {"c", "a", z, {}}, {"b", "c", z, {}}, {"c", "b", z, {}}},
        2.0);
    // 3 events, 6 pairs: -3 log 6 for every beta
    const double expect = -3.0 * std::log(6.0);
    CHECK(log_pseudo_partial_likelihood(ds, Vec::Zero(1)) ==
          doctest::Approx(expect).epsilon(1e-12));
    CHECK(log_pseudo_partial_likelihood(ds, (Vec(1) << 2.3).finished()) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("log pseudo partial likelihood: two-pair softmax value") {
    Dataset ds = two_pair_dataset(1, 0);
    CHECK(log_pseudo_partial_likelihood(ds, Vec::Zero(1)) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("log pseudo partial likelihood: matches extended-precision resummation") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 25; ++rep) {
        Dataset ds = testsup::random_dataset(rng, 5, 2, 15);
        Vec beta = testsup::random_beta(rng, 2);
        double want = static_cast<double>(testsup::ref_loglik(ds, beta));
        double got = log_pseudo_partial_likelihood(ds, beta);
        CHECK(testsup::rel_err(got, want) < 1e-12);
    }
}

TEST_CASE("log pseudo partial likelihood: zero events is an error") {
    Dataset ds = make_dataset({"a", "b"},
                              {{"a", "b", (Vec(1) << 1.0).finished(), {}},
                               {"b", "a", (Vec(1) << 0.0).finished(), {}}},
                              1.0);
    CHECK_THROWS_AS(log_pseudo_partial_likelihood(ds, Vec::Zero(1)), EstimationError);
}

TEST_CASE("score: identical covariates give zero score at every beta") {
    Vec z = (Vec(2) << 1.0, -2.0).finished();
    Dataset ds = make_dataset({"a", "b"},
                              {{"a", "b", z, {0.25, 0.5}}, {"b", "a", z, {0.75}}}, 1.0);
    CHECK(score(ds, Vec::Zero(2)).norm() < 1e-12);
    CHECK(score(ds, (Vec(2) << 1.0, 2.0).finished()).norm() < 1e-10);
}

TEST_CASE("score: two-pair example at beta = 0") {
    Dataset ds = two_pair_dataset(1, 0);
    CHECK(score(ds, Vec::Zero(1))(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("neg_hessian: identical covariates give the zero matrix") {
    Vec z = (Vec(1) << 0.3).finished();
    Dataset ds = make_dataset({"a", "b"}, {{"a", "b", z, {0.5}}, {"b", "a", z, {}}}, 1.0);
    CHECK(neg_hessian(ds, Vec::Zero(1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("neg_hessian: Bernoulli(1/2) variance for the two-pair design") {
    Dataset ds = two_pair_dataset(1, 0);
    CHECK(neg_hessian(ds, Vec::Zero(1))(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("fit: closed-form solution beta = log 3 for 3-vs-1 events") {
    Dataset ds = two_pair_dataset(3, 1);
    FitResult res = fit(ds);
    REQUIRE(res.converged);
    CHECK(res.beta_hat(0) == doctest::Approx(std::log(3.0)).epsilon(1e-8));
    CHECK(res.score_norm <= 1e-8);
    CHECK(std::isfinite(res.log_pl));
}

TEST_CASE("fit: identical covariates converge at init with zero score") {
    Vec z = (Vec(1) << 2.0).finished();
    Dataset ds = make_dataset({"a", "b"}, {{"a", "b", z, {0.5}}, {"b", "a", z, {0.25}}}, 1.0);
    FitResult res = fit(ds);
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    CHECK(res.beta_hat(0) == 0.0);
    CHECK(res.score_norm < 1e-10);
}

TEST_CASE("fit: monotone likelihood raises a separation error") {
    // all events on the z=1 pair, none on z=0: score stays positive
    Dataset ds = two_pair_dataset(4, 0);
    CHECK_THROWS_AS(fit(ds), SeparationError);
}

TEST_CASE("fit: max_iter exceeded reports non-convergence") {
    Dataset ds = two_pair_dataset(3, 1);
    FitOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-14;
    FitResult res = fit(ds, opts);
    CHECK_FALSE(res.converged);
    CHECK(res.iterations == 1);
}

TEST_CASE("breslow baseline: constant denominator at beta = 0") {
    Dataset ds = make_dataset({"a", "b", "c"},
                              {{"a", "b", (Vec(1) << 1.0).finished(), {0.2, 0.6}},
                               {"b", "a", (Vec(1) << 0.0).finished(), {0.4}},
                               {"a", "c", (Vec(1) << 0.5).finished(), {}},
                               {"c", "a", (Vec(1) << 0.5).finished(), {}},
                               {"b", "c", (Vec(1) << 0.5).finished(), {}},
                               {"c", "b", (Vec(1) << 0.5).finished(), {}}},
                              1.0);
    BaselineCurve curve = breslow_baseline(ds, Vec::Zero(1));
    // E / P = 3 / 6
    CHECK(curve.value_at(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(curve.value_at(0.1) == 0.0);
    CHECK(curve.jump_times.size() == 3);
}

TEST_CASE("breslow baseline: no events means the zero curve") {
    Dataset ds = make_dataset({"a", "b"},
                              {{"a", "b", (Vec(1) << 1.0).finished(), {}},
                               {"b", "a", (Vec(1) << 0.0).finished(), {}}},
                              1.0);
    BaselineCurve curve = breslow_baseline(ds, Vec::Zero(1));
    CHECK(curve.jump_times.empty());
    CHECK(curve.value_at(0.7) == 0.0);
}

TEST_CASE("residual process: zero-event pair tracks minus the baseline") {
    Dataset ds = make_dataset({"a", "b"},
                              {{"a", "b", (Vec(1) << 1.0).finished(), {0.25, 0.5}},
                               {"b", "a", (Vec(1) << 0.0).finished(), {}}},
                              1.0);
    Vec beta = Vec::Zero(1);
    BaselineCurve curve = breslow_baseline(ds, beta);
    int idx = ds.pair_index("b", "a");
    REQUIRE(idx >= 0);
    StepFunction m = residual_process(ds, beta, curve, idx);
    for (double t : {0.3, 0.6, 1.0})
        CHECK(m.value_at(t) == doctest::Approx(-curve.value_at(t)).epsilon(1e-12));
}

TEST_CASE("residual process: totals balance at the fitted parameters") {
    std::mt19937_64 rng(23);
    Dataset ds = testsup::random_dataset(rng, 4, 1, 12);
    FitResult res;
    for (;;) {
        try {
            res = fit(ds);
            break;
        } catch (const SeparationError&) {
            ds = testsup::random_dataset(rng, 4, 1, 12);  // monotone draw; resample
        }
    }
    BaselineCurve curve = breslow_baseline(ds, res.beta_hat);
    double total = 0.0;
    for (std::size_t i = 0; i < ds.pairs().size(); ++i)
        total += residual_process(ds, res.beta_hat, curve, static_cast<int>(i))
                     .value_at(ds.horizon());
    CHECK(std::fabs(total) <= 1e-8 * static_cast<double>(ds.total_events()));
}

TEST_CASE("residual process: single event jumps by +1 over the drift") {
    Dataset ds = make_dataset({"a", "b"},
                              {{"a", "b", (Vec(1) << 1.0).finished(), {0.5}},
                               {"b", "a", (Vec(1) << 0.0).finished(), {}}},
                              1.0);
    Vec beta = (Vec(1) << 0.3).finished();
    BaselineCurve curve = breslow_baseline(ds, beta);
    int idx = ds.pair_index("a", "b");
    StepFunction m = residual_process(ds, beta, curve, idx);
    double w = std::exp(0.3);
    CHECK(m.value_at(0.5) ==
          doctest::Approx(1.0 - w * curve.value_at(0.5)).epsilon(1e-12));
    CHECK(m.value_at(0.4) == 0.0);  // nothing happened yet
}

TEST_CASE("invariant: location shift of covariates leaves score and fit unchanged") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        int p = 2;
        Dataset ds = testsup::random_dataset(rng, 4, p, 12);
        Vec c = (Vec(p) << 3.7, -1.2).finished();

        std::vector<testsup::PairSpec> shifted;
        for (const auto& pd : ds.pairs())
            shifted.push_back({ds.nodes().label(pd.sender), ds.nodes().label(pd.recipient),
                               pd.covariates.values.front() + c, pd.events});
        Dataset ds2 = make_dataset(ds.nodes().labels(), shifted, ds.horizon());

        Vec beta = testsup::random_beta(rng, p);
        CHECK((score(ds, beta) - score(ds2, beta)).cwiseAbs().maxCoeff() < 1e-10);

        FitOptions opts;
        opts.tol = 1e-12;
        FitResult f1 = fit(ds, opts);
        FitResult f2 = fit(ds2, opts);
        if (f1.converged && f2.converged)
            CHECK((f1.beta_hat - f2.beta_hat).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("invariant: strictly increasing time relabeling leaves the fit unchanged") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 5; ++rep) {
        Dataset ds = testsup::random_dataset(rng, 4, 2, 12, 1.0);
        std::vector<testsup::PairSpec> relabeled;
        for (const auto& pd : ds.pairs()) {
            std::vector<double> ev;
            for (double t : pd.events) ev.push_back(std::expm1(t));  // increasing map
            relabeled.push_back({ds.nodes().label(pd.sender), ds.nodes().label(pd.recipient),
                                 pd.covariates.values.front(), ev});
        }
        Dataset ds2 = make_dataset(ds.nodes().labels(), relabeled, std::expm1(1.0));

        FitOptions opts;
        opts.tol = 1e-12;
        bool sep1 = false, sep2 = false;
        FitResult f1, f2;
        try { f1 = fit(ds, opts); } catch (const SeparationError&) { sep1 = true; }
        try { f2 = fit(ds2, opts); } catch (const SeparationError&) { sep2 = true; }
        REQUIRE(sep1 == sep2);
        if (!sep1 && f1.converged && f2.converged)
            CHECK((f1.beta_hat - f2.beta_hat).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("invariant: node permutation leaves fit and baseline unchanged") {
    std::mt19937_64 rng(41);
    Dataset ds = testsup::random_dataset(rng, 5, 2, 15);
    // permute labels by reversing the label set
    auto labels = ds.nodes().labels();
    std::vector<std::string> reversed(labels.rbegin(), labels.rend());
    std::map<std::string, std::string> relabel;
    for (std::size_t i = 0; i < labels.size(); ++i) relabel[labels[i]] = reversed[i];

    std::vector<testsup::PairSpec> permuted;
    for (const auto& pd : ds.pairs())
        permuted.push_back({relabel[ds.nodes().label(pd.sender)],
                            relabel[ds.nodes().label(pd.recipient)],
                            pd.covariates.values.front(), pd.events});
    Dataset ds2 = make_dataset(labels, permuted, ds.horizon());

    FitOptions opts;
    opts.tol = 1e-12;
    FitResult f1 = fit(ds, opts);
    FitResult f2 = fit(ds2, opts);
    REQUIRE(f1.converged == f2.converged);
    if (f1.converged)
        CHECK((f1.beta_hat - f2.beta_hat).cwiseAbs().maxCoeff() < 1e-10);
    BaselineCurve c1 = breslow_baseline(ds, f1.beta_hat);
    BaselineCurve c2 = breslow_baseline(ds2, f2.beta_hat);
    REQUIRE(c1.jump_times.size() == c2.jump_times.size());
    for (std::size_t k = 0; k < c1.jump_times.size(); ++k) {
        CHECK(c1.jump_times[k] == c2.jump_times[k]);
        CHECK(c1.cumulative[k] == doctest::Approx(c2.cumulative[k]).epsilon(1e-10));
    }
}

TEST_CASE("invariant: zbar stays in the convex hull of the covariates") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 10; ++rep) {
        int p = 2;
        Dataset ds = testsup::random_dataset(rng, 4, p, 8);
        Vec beta = testsup::random_beta(rng, p, 1.5);
        auto agg = aggregates(ds, beta, 0.5);
        Vec zbar = agg.zbar();
        for (int k = 0; k < p; ++k) {
            double lo = 1e300, hi = -1e300;
            for (const auto& pd : ds.pairs()) {
                lo = std::min(lo, pd.covariates.values.front()(k));
                hi = std::max(hi, pd.covariates.values.front()(k));
            }
            CHECK(zbar(k) >= lo - 1e-12);
            CHECK(zbar(k) <= hi + 1e-12);
        }
    }
}

TEST_CASE("piecewise covariates: left limit drives event evaluation") {
    // one pair switches covariate from 0 to 1 at t = 0.5; an event exactly at
    // 0.5 must see the pre-switch value
    CovariatePath path;
    path.starts = {0.0, 0.5};
    path.values = {(Vec(1) << 0.0).finished(), (Vec(1) << 1.0).finished()};

    EventLog log;
    log.horizon = 1.0;
    log.events[{"a", "b"}] = {0.5, 0.75};

    CovariateSet covs;
    covs.dim = 1;
    covs.paths.emplace(LabelPair{"a", "b"}, path);
    covs.paths.emplace(LabelPair{"b", "a"},
                       CovariatePath::constant((Vec(1) << 0.25).finished()));

    Dataset ds = Dataset::build(NodeSet({"a", "b"}), log, covs);
    Vec beta = (Vec(1) << 0.8).finished();

    // by hand: event at 0.5 sees z = 0, event at 0.75 sees z = 1
    auto soft = [&](double z_ev, double z_other) {
        double s = std::exp(0.8 * z_ev) + std::exp(0.8 * z_other);
        return 0.8 * z_ev - std::log(s);
    };
    double want = soft(0.0, 0.25) + soft(1.0, 0.25);
    CHECK(log_pseudo_partial_likelihood(ds, beta) ==
          doctest::Approx(want).epsilon(1e-12));

    // finite differences still agree with a time-varying path
    CHECK((score(ds, beta) - testsup::fd_score(ds, beta)).cwiseAbs().maxCoeff() < 1e-6);
}
