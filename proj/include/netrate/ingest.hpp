#pragma once

#include "netrate/data.hpp"
#include "netrate/types.hpp"

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace netrate {

struct RejectedRow {
    std::size_t row = 0;  // 1-based, header included
    std::string reason;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t events_ingested = 0;
    std::vector<RejectedRow> rejected;
    std::size_t ties_perturbed = 0;
};

/// Reads `sender,recipient,timestamp` rows into an EventLog. Timestamps may
/// be plain reals or ISO-8601 datetimes (converted to Unix seconds).
/// Self-loop rows are rejected into the report; malformed rows throw
/// ParseError with the row number; a timestamp above the given horizon
/// throws ValidationError. Without a horizon, the maximum timestamp is used.
/// Within-pair duplicate timestamps are perturbed (k-th duplicate moved by
/// k*eps, eps = 2^-32 * horizon) and counted in the report.
EventLog ingest_events(std::istream& in, std::optional<double> horizon = std::nullopt,
                       IngestReport* report = nullptr);
EventLog ingest_events_file(const std::string& path,
                            std::optional<double> horizon = std::nullopt,
                            IngestReport* report = nullptr);

/// Per-node categorical attributes (from `node,<attr1>,...` CSV).
struct NodeAttributes {
    std::vector<std::string> attr_names;
    std::vector<std::string> node_order;  // file order
    std::map<std::string, std::map<std::string, std::string>> values;  // node -> attr -> value
};

NodeAttributes read_node_attributes(std::istream& in);
NodeAttributes read_node_attributes_file(const std::string& path);

/// Static homophily covariates: for every ordered pair (i, j) and attribute
/// a, the indicator that i and j share the same value of a. Throws
/// ValidationError naming the node and attribute on a missing value.
CovariateSet build_homophily_covariates(const NodeAttributes& attrs,
                                        const std::vector<std::string>& attr_names);

struct EnronReport {
    std::size_t messages_read = 0;
    std::size_t messages_dropped = 0;   // recipient list larger than the cap
    std::size_t messages_retained = 0;
    std::size_t events = 0;
    std::vector<RejectedRow> rejected;  // bad timestamps etc.
    std::size_t ties_perturbed = 0;
    std::size_t boundary_nudged = 0;    // events at the transform origin
    double drop_fraction() const {
        return messages_read == 0 ? 0.0
                                  : static_cast<double>(messages_dropped) /
                                        static_cast<double>(messages_read);
    }
};

/// Enron-style preprocessing of `sender,recipients,timestamp` rows with
/// `;`-separated recipient lists: drops messages with more than
/// max_recipients recipients, expands the survivors into one event per
/// (sender, recipient) pair, and maps each timestamp t to log(t - t0 + 1)
/// with t0 the earliest retained timestamp.
EventLog enron_preprocess(std::istream& in, int max_recipients = 5,
                          EnronReport* report = nullptr);
EventLog enron_preprocess_file(const std::string& path, int max_recipients = 5,
                               EnronReport* report = nullptr);

/// Timestamp parsing shared by the ingestion paths: a real number, or an
/// ISO-8601 date / datetime ("2001-05-14", "2001-05-14T09:30:00",
/// fractional seconds and trailing 'Z' allowed) as Unix seconds.
std::optional<double> parse_timestamp(const std::string& text);

}  // namespace netrate
