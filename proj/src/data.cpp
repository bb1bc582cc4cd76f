#include "netrate/data.hpp"

#include <algorithm>
#include <cmath>

namespace netrate {

NodeSet::NodeSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) throw ValidationError("node set needs at least 2 nodes");
    index_.reserve(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        auto [it, inserted] = index_.emplace(labels_[i], static_cast<int>(i));
        (void)it;
        if (!inserted) throw ValidationError("duplicate node label: " + labels_[i]);
    }
}

int NodeSet::index_of(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? -1 : it->second;
}

std::size_t EventLog::total_events() const {
    std::size_t n = 0;
    for (const auto& [pair, times] : events) n += times.size();
    return n;
}

void EventLog::validate() const {
    if (horizon < 0) throw ValidationError("horizon must be nonnegative");
    for (const auto& [pair, times] : events) {
        if (pair.first == pair.second)
            throw ValidationError("self pair in event log: " + pair.first);
        double prev = 0.0;
        for (double t : times) {
            if (!(t > 0.0)) throw ValidationError("event time must be positive");
            if (t > horizon)
                throw ValidationError("event time exceeds horizon for pair " + pair.first +
                                      " -> " + pair.second);
            if (t <= prev && prev > 0.0)
                throw ValidationError("event times not strictly increasing for pair " +
                                      pair.first + " -> " + pair.second);
            prev = t;
        }
    }
}

CovariatePath CovariatePath::constant(Vec value) {
    CovariatePath p;
    p.starts = {0.0};
    p.values.push_back(std::move(value));
    return p;
}

const Vec& CovariatePath::at(double t) const {
    // last segment with start <= t
    auto it = std::upper_bound(starts.begin(), starts.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - starts.begin());
    if (idx == 0) return values.front();
    return values[idx - 1];
}

const Vec& CovariatePath::left_limit(double t) const {
    if (t <= 0.0) return values.front();
    // last segment with start < t
    auto it = std::lower_bound(starts.begin(), starts.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - starts.begin());
    if (idx == 0) return values.front();
    return values[idx - 1];
}

void CovariatePath::validate(double horizon) const {
    if (starts.empty() || starts.size() != values.size())
        throw ValidationError("covariate path needs matching starts and values");
    if (starts.front() != 0.0)
        throw ValidationError("covariate path must start at time 0");
    if (starts.back() > horizon && horizon > 0.0)
        throw ValidationError("covariate segment starts beyond the horizon");
    for (std::size_t k = 1; k < starts.size(); ++k)
        if (!(starts[k] > starts[k - 1]))
            throw ValidationError("covariate segment starts must be strictly increasing");
    int p = dim();
    for (const Vec& v : values) {
        if (v.size() != p) throw ValidationError("covariate segment dimension mismatch");
        if (!v.allFinite()) throw ValidationError("covariate values must be finite");
    }
}

void CovariateSet::validate(double horizon) const {
    if (dim <= 0) throw ValidationError("covariate dimension must be positive");
    for (const auto& [pair, path] : paths) {
        if (pair.first == pair.second)
            throw ValidationError("self pair in covariate set: " + pair.first);
        path.validate(horizon);
        if (path.dim() != dim)
            throw ValidationError("covariate path dimension mismatch for pair " + pair.first +
                                  " -> " + pair.second);
    }
}

Dataset Dataset::build(NodeSet nodes, const EventLog& log, const CovariateSet& covariates) {
    log.validate();
    covariates.validate(log.horizon);

    Dataset ds;
    ds.nodes_ = std::move(nodes);
    ds.horizon_ = log.horizon;
    ds.dim_ = covariates.dim;

    // Every pair with events must carry a covariate path.
    for (const auto& [pair, times] : log.events) {
        if (!covariates.paths.count(pair))
            throw ValidationError("pair with events has no covariate path: " + pair.first +
                                  " -> " + pair.second);
    }

    std::map<std::pair<int, int>, const CovariatePath*> ordered;
    for (const auto& [pair, path] : covariates.paths) {
        int s = ds.nodes_.index_of(pair.first);
        int r = ds.nodes_.index_of(pair.second);
        if (s < 0) throw ValidationError("unknown node label in covariates: " + pair.first);
        if (r < 0) throw ValidationError("unknown node label in covariates: " + pair.second);
        ordered.emplace(std::make_pair(s, r), &path);
    }

    ds.pairs_.reserve(ordered.size());
    for (const auto& [key, path] : ordered) {
        PairData pd;
        pd.sender = key.first;
        pd.recipient = key.second;
        pd.covariates = *path;
        auto it = log.events.find({ds.nodes_.label(key.first), ds.nodes_.label(key.second)});
        if (it != log.events.end()) pd.events = it->second;
        ds.total_events_ += pd.events.size();
        ds.all_static_ = ds.all_static_ && pd.covariates.is_static();
        ds.pair_lookup_.emplace(key, static_cast<int>(ds.pairs_.size()));
        ds.pairs_.push_back(std::move(pd));
    }
    return ds;
}

int Dataset::pair_index(const std::string& sender, const std::string& recipient) const {
    int s = nodes_.index_of(sender);
    int r = nodes_.index_of(recipient);
    if (s < 0 || r < 0) return -1;
    auto it = pair_lookup_.find({s, r});
    return it == pair_lookup_.end() ? -1 : it->second;
}

EventLog Dataset::to_event_log() const {
    EventLog log;
    log.horizon = horizon_;
    for (const PairData& pd : pairs_) {
        if (pd.events.empty()) continue;
        log.events.emplace(LabelPair{nodes_.label(pd.sender), nodes_.label(pd.recipient)},
                           pd.events);
    }
    return log;
}

CovariateSet Dataset::to_covariate_set() const {
    CovariateSet cs;
    cs.dim = dim_;
    for (const PairData& pd : pairs_)
        cs.paths.emplace(LabelPair{nodes_.label(pd.sender), nodes_.label(pd.recipient)},
                         pd.covariates);
    return cs;
}

}  // namespace netrate
