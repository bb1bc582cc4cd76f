#pragma once

#include "netrate/types.hpp"

#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace netrate {

/// The actors of the network. Labels are opaque identifiers; indices are the
/// positions used everywhere downstream.
class NodeSet {
public:
    NodeSet() = default;
    explicit NodeSet(std::vector<std::string> labels);

    int count() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int index) const { return labels_.at(index); }
    int index_of(const std::string& label) const;  // -1 if absent
    bool contains(const std::string& label) const { return index_of(label) >= 0; }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
};

using LabelPair = std::pair<std::string, std::string>;

/// Directed pairwise event history on an observation window [0, T].
/// Only pairs with at least one event are stored; an absent pair has no events.
struct EventLog {
    double horizon = 0.0;
    std::map<LabelPair, std::vector<double>> events;

    std::size_t total_events() const;
    /// Checks: no self pairs, timestamps in (0, horizon], strictly increasing.
    void validate() const;
};

/// Piecewise-constant covariate path on [0, T]. The value on
/// [starts[k], starts[k+1]) is values[k]; starts[0] must be 0.
struct CovariatePath {
    std::vector<double> starts;
    std::vector<Vec> values;

    static CovariatePath constant(Vec value);
    bool is_static() const { return starts.size() == 1; }
    int dim() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }

    /// Value at time t (right-continuous convention).
    const Vec& at(double t) const;
    /// Left limit at t: the value in force just before t. Event-time
    /// evaluation of covariates uses this. At t == 0 returns the value at 0.
    const Vec& left_limit(double t) const;

    void validate(double horizon) const;
};

/// p-dimensional covariate paths for ordered pairs.
struct CovariateSet {
    int dim = 0;
    std::map<LabelPair, CovariatePath> paths;

    void validate(double horizon) const;
};

/// One ordered pair compiled into index space: covariate path plus the
/// pair's (possibly empty) event time sequence.
struct PairData {
    int sender = -1;
    int recipient = -1;
    std::vector<double> events;
    CovariatePath covariates;
};

/// Analysis-ready dataset. The risk set is every ordered pair that carries a
/// covariate path; pairs with zero events stay in it (they contribute to the
/// risk-set denominators). Immutable after build; safe to share across threads.
class Dataset {
public:
    static Dataset build(NodeSet nodes, const EventLog& log, const CovariateSet& covariates);

    const NodeSet& nodes() const { return nodes_; }
    double horizon() const { return horizon_; }
    int dim() const { return dim_; }
    const std::vector<PairData>& pairs() const { return pairs_; }
    std::size_t total_events() const { return total_events_; }
    bool all_static() const { return all_static_; }

    /// Index into pairs() for (sender, recipient) labels, -1 if absent.
    int pair_index(const std::string& sender, const std::string& recipient) const;

    /// Reconstructs the label-keyed views (used by serialization).
    EventLog to_event_log() const;
    CovariateSet to_covariate_set() const;

private:
    NodeSet nodes_;
    double horizon_ = 0.0;
    int dim_ = 0;
    std::vector<PairData> pairs_;  // sorted by (sender, recipient) index
    std::size_t total_events_ = 0;
    bool all_static_ = true;
    std::map<std::pair<int, int>, int> pair_lookup_;
};

/// Up to two deleted nodes; pairs touching a deleted node leave the risk set.
/// This is the jackknife's immutable dataset view.
struct NodeDeletion {
    int first = -1;
    int second = -1;

    static NodeDeletion none() { return {}; }
    static NodeDeletion one(int s) { return {s, -1}; }
    static NodeDeletion two(int s, int t) { return {s, t}; }

    bool keeps(const PairData& pair) const {
        return pair.sender != first && pair.sender != second &&
               pair.recipient != first && pair.recipient != second;
    }
    bool empty() const { return first < 0 && second < 0; }
};

}  // namespace netrate
