#include <doctest.h>

#include "test_support.hpp"

#include "netrate/data.hpp"
#include "netrate/dataset_io.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace netrate;
using testsup::make_dataset;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("netrate_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("node set: uniqueness and minimum size") {
    CHECK_THROWS_AS(NodeSet({"a"}), ValidationError);
    CHECK_THROWS_AS(NodeSet({"a", "a"}), ValidationError);
    NodeSet ns({"a", "b", "c"});
    CHECK(ns.count() == 3);
    CHECK(ns.index_of("b") == 1);
    CHECK(ns.index_of("zzz") == -1);
}

TEST_CASE("event log validation rejects invariant violations") {
    EventLog log;
    log.horizon = 1.0;
    log.events[{"a", "a"}] = {0.5};
    CHECK_THROWS_AS(log.validate(), ValidationError);

    EventLog log2;
    log2.horizon = 1.0;
    log2.events[{"a", "b"}] = {0.5, 0.5};  // tie within a pair
    CHECK_THROWS_AS(log2.validate(), ValidationError);

    EventLog log3;
    log3.horizon = 1.0;
    log3.events[{"a", "b"}] = {1.5};  // beyond horizon
    CHECK_THROWS_AS(log3.validate(), ValidationError);

    EventLog ok;
    ok.horizon = 2.0;
    ok.events[{"a", "b"}] = {0.5, 1.0};
    ok.events[{"b", "a"}] = {0.5};  // cross-pair tie is fine
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.total_events() == 3);
}

TEST_CASE("covariate path: segment lookup and left limits") {
    CovariatePath path;
    path.starts = {0.0, 1.0, 2.0};
    path.values = {(Vec(1) << 10.0).finished(), (Vec(1) << 20.0).finished(),
                   (Vec(1) << 30.0).finished()};
    path.validate(3.0);

    CHECK(path.at(0.0)(0) == 10.0);
    CHECK(path.at(0.99)(0) == 10.0);
    CHECK(path.at(1.0)(0) == 20.0);  // right-continuous
    CHECK(path.at(2.5)(0) == 30.0);

    CHECK(path.left_limit(1.0)(0) == 10.0);  // value in force just before t
    CHECK(path.left_limit(1.5)(0) == 20.0);
    CHECK(path.left_limit(0.0)(0) == 10.0);

    CovariatePath bad;
    bad.starts = {0.5};
    bad.values = {(Vec(1) << 1.0).finished()};
    CHECK_THROWS_AS(bad.validate(1.0), ValidationError);
}

TEST_CASE("dataset build: pairs with events need covariates, horizon consistent") {
    EventLog log;
    log.horizon = 1.0;
    log.events[{"a", "b"}] = {0.5};
    CovariateSet covs;
    covs.dim = 1;
    covs.paths.emplace(LabelPair{"b", "a"},
                       CovariatePath::constant((Vec(1) << 1.0).finished()));
    CHECK_THROWS_AS(Dataset::build(NodeSet({"a", "b"}), log, covs), ValidationError);

    covs.paths.emplace(LabelPair{"a", "b"},
                       CovariatePath::constant((Vec(1) << 0.0).finished()));
    Dataset ds = Dataset::build(NodeSet({"a", "b"}), log, covs);
    CHECK(ds.pairs().size() == 2);  // zero-event pair stays in the risk set
    CHECK(ds.total_events() == 1);
    CHECK(ds.pair_index("a", "b") >= 0);
    CHECK(ds.pair_index("b", "a") >= 0);
    CHECK(ds.pair_index("a", "zzz") == -1);
}

TEST_CASE("serialization: save/load round-trips a dataset exactly") {
    std::mt19937_64 rng(5150);
    Dataset ds = testsup::random_dataset(rng, 5, 3, 18, 1.0);
    fs::path dir = temp_dir("roundtrip");
    save_dataset(ds, dir.string());
    Dataset back = load_dataset(dir.string());

    CHECK(back.horizon() == ds.horizon());
    CHECK(back.dim() == ds.dim());
    CHECK(back.nodes().labels() == ds.nodes().labels());
    REQUIRE(back.pairs().size() == ds.pairs().size());
    for (std::size_t a = 0; a < ds.pairs().size(); ++a) {
        CHECK(back.pairs()[a].events == ds.pairs()[a].events);
        CHECK((back.pairs()[a].covariates.values.front() -
               ds.pairs()[a].covariates.values.front())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }

    // saving the loaded dataset reproduces the bytes (ingestion idempotence)
    fs::path dir2 = temp_dir("roundtrip2");
    save_dataset(back, dir2.string());
    for (const char* f : {"events.csv", "nodes.csv", "covariates.csv", "meta.json"})
        CHECK(slurp(dir / f) == slurp(dir2 / f));
}

TEST_CASE("serialization: node permutation gives an isomorphic dataset") {
    std::mt19937_64 rng(6040);
    Dataset ds = testsup::random_dataset(rng, 4, 2, 10, 1.0);

    // relabel nodes by a fixed permutation and rebuild
    auto labels = ds.nodes().labels();
    std::vector<std::string> perm = {labels[2], labels[0], labels[3], labels[1]};
    std::map<std::string, std::string> rename;
    for (std::size_t i = 0; i < labels.size(); ++i) rename[labels[i]] = perm[i];

    std::vector<testsup::PairSpec> specs;
    for (const auto& pd : ds.pairs())
        specs.push_back({rename[ds.nodes().label(pd.sender)],
                         rename[ds.nodes().label(pd.recipient)],
                         pd.covariates.values.front(), pd.events});
    Dataset ds2 = make_dataset(labels, specs, ds.horizon());

    // pair-indexed multisets of timestamps must map across the permutation
    for (const auto& pd : ds.pairs()) {
        int idx = ds2.pair_index(rename[ds.nodes().label(pd.sender)],
                                 rename[ds.nodes().label(pd.recipient)]);
        REQUIRE(idx >= 0);
        CHECK(ds2.pairs()[idx].events == pd.events);
    }
}

TEST_CASE("deletion view: masks every pair touching the node") {
    std::mt19937_64 rng(77);
    Dataset ds = testsup::random_dataset(rng, 4, 1, 6, 1.0);
    NodeDeletion del = NodeDeletion::one(2);
    for (const auto& pd : ds.pairs()) {
        bool touches = pd.sender == 2 || pd.recipient == 2;
        CHECK(del.keeps(pd) == !touches);
    }
    NodeDeletion del2 = NodeDeletion::two(0, 3);
    for (const auto& pd : ds.pairs()) {
        bool touches = pd.sender == 0 || pd.recipient == 0 || pd.sender == 3 ||
                       pd.recipient == 3;
        CHECK(del2.keeps(pd) == !touches);
    }
}
