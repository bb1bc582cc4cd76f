#include "netrate/ingest.hpp"

#include "netrate/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace netrate {

namespace {

// Howard Hinnant's days-from-civil algorithm.
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

std::optional<double> parse_real(const std::string& s) {
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

void check_header(const std::vector<std::string>& row,
                  const std::vector<std::string>& expected) {
    if (row.size() < expected.size())
        throw ParseError(1, "expected header with columns " + [&] {
            std::string s;
            for (const auto& e : expected) s += (s.empty() ? "" : ",") + e;
            return s;
        }());
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (trim(row[i]) != expected[i])
            throw ParseError(1, "expected column '" + expected[i] + "', found '" + row[i] + "'");
}

constexpr double kTieEpsScale = 1.0 / 4294967296.0;  // 2^-32

/// Sorts each pair's times and shifts within-pair duplicates by multiples of
/// eps = 2^-32 * horizon (downwards when a run would cross the horizon).
std::size_t apply_tie_policy(std::map<LabelPair, std::vector<double>>& events,
                             double horizon) {
    const double eps = horizon * kTieEpsScale;
    std::size_t perturbed = 0;
    for (auto& [pair, times] : events) {
        std::sort(times.begin(), times.end());
        std::size_t i = 0;
        while (i < times.size()) {
            std::size_t j = i + 1;
            while (j < times.size() && times[j] == times[i]) ++j;
            const std::size_t run = j - i;
            if (run > 1) {
                double base = times[i];
                if (base + static_cast<double>(run - 1) * eps <= horizon) {
                    for (std::size_t k = 1; k < run; ++k)
                        times[i + k] = base + static_cast<double>(k) * eps;
                } else {
                    for (std::size_t k = 0; k < run; ++k)
                        times[i + k] = base - static_cast<double>(run - 1 - k) * eps;
                }
                perturbed += run - 1;
            }
            i = j;
        }
        std::sort(times.begin(), times.end());
        for (std::size_t k = 1; k < times.size(); ++k)
            if (times[k] <= times[k - 1])
                times[k] = std::nextafter(times[k - 1], std::numeric_limits<double>::max());
    }
    return perturbed;
}

}  // namespace

std::optional<double> parse_timestamp(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    if (auto v = parse_real(s)) return v;

    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double sec = 0.0;
    int consumed = 0;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%lf%n", &y, &mo, &d, &h, &mi, &sec,
                    &consumed) == 6 ||
        std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%lf%n", &y, &mo, &d, &h, &mi, &sec,
                    &consumed) == 6) {
        std::string rest = s.substr(consumed);
        if (!rest.empty() && rest != "Z") return std::nullopt;
    } else if (std::sscanf(s.c_str(), "%d-%d-%d%n", &y, &mo, &d, &consumed) == 3 &&
               consumed == static_cast<int>(s.size())) {
        h = mi = 0;
        sec = 0.0;
    } else {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        sec < 0.0 || sec >= 61.0)
        return std::nullopt;
    return static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 +
           mi * 60.0 + sec;
}

EventLog ingest_events(std::istream& in, std::optional<double> horizon,
                       IngestReport* report) {
    IngestReport local;
    IngestReport& rep = report ? *report : local;

    auto header = csv_read_row(in);
    if (!header) {
        // empty source: nothing to ingest
        EventLog log;
        log.horizon = horizon.value_or(0.0);
        return log;
    }
    check_header(*header, {"sender", "recipient", "timestamp"});

    std::map<LabelPair, std::vector<double>> events;
    double max_time = 0.0;
    std::size_t row_no = 1;
    while (auto row = csv_read_row(in)) {
        ++row_no;
        ++rep.rows_read;
        if (row->size() == 1 && trim((*row)[0]).empty()) continue;  // blank line
        if (row->size() != 3)
            throw ParseError(row_no, "expected 3 fields, found " +
                                         std::to_string(row->size()));
        std::string sender = trim((*row)[0]);
        std::string recipient = trim((*row)[1]);
        if (sender.empty() || recipient.empty())
            throw ParseError(row_no, "empty sender or recipient");
        auto t = parse_timestamp((*row)[2]);
        if (!t) throw ParseError(row_no, "unparseable timestamp '" + (*row)[2] + "'");
        if (!(*t > 0.0))
            throw ValidationError("row " + std::to_string(row_no) +
                                  ": timestamp must be positive");
        if (sender == recipient) {
            rep.rejected.push_back({row_no, "self loop: " + sender});
            continue;
        }
        if (horizon && *t > *horizon)
            throw ValidationError("row " + std::to_string(row_no) +
                                  ": timestamp exceeds horizon");
        events[{sender, recipient}].push_back(*t);
        max_time = std::max(max_time, *t);
        ++rep.events_ingested;
    }

    EventLog log;
    log.horizon = horizon.value_or(max_time);
    rep.ties_perturbed = apply_tie_policy(events, log.horizon);
    log.events = std::move(events);
    log.validate();
    return log;
}

EventLog ingest_events_file(const std::string& path, std::optional<double> horizon,
                            IngestReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open events file: " + path);
    return ingest_events(in, horizon, report);
}

NodeAttributes read_node_attributes(std::istream& in) {
    auto header = csv_read_row(in);
    if (!header || header->empty() || trim((*header)[0]) != "node")
        throw ParseError(1, "expected header starting with 'node'");
    NodeAttributes attrs;
    for (std::size_t i = 1; i < header->size(); ++i)
        attrs.attr_names.push_back(trim((*header)[i]));

    std::size_t row_no = 1;
    while (auto row = csv_read_row(in)) {
        ++row_no;
        if (row->size() == 1 && trim((*row)[0]).empty()) continue;
        if (row->size() != header->size())
            throw ParseError(row_no, "expected " + std::to_string(header->size()) +
                                         " fields, found " + std::to_string(row->size()));
        std::string node = trim((*row)[0]);
        if (node.empty()) throw ParseError(row_no, "empty node label");
        if (attrs.values.count(node))
            throw ParseError(row_no, "duplicate node label: " + node);
        attrs.node_order.push_back(node);
        auto& m = attrs.values[node];
        for (std::size_t i = 1; i < row->size(); ++i)
            m[attrs.attr_names[i - 1]] = trim((*row)[i]);
    }
    return attrs;
}

NodeAttributes read_node_attributes_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open node attributes file: " + path);
    return read_node_attributes(in);
}

CovariateSet build_homophily_covariates(const NodeAttributes& attrs,
                                        const std::vector<std::string>& attr_names) {
    if (attr_names.empty()) throw ValidationError("at least one attribute name required");
    const auto& nodes = attrs.node_order;

    // fail fast on missing values, naming node and attribute
    for (const auto& node : nodes) {
        const auto& m = attrs.values.at(node);
        for (const auto& a : attr_names) {
            auto it = m.find(a);
            if (it == m.end() || it->second.empty())
                throw ValidationError("node '" + node + "' is missing attribute '" + a + "'");
        }
    }

    CovariateSet cs;
    cs.dim = static_cast<int>(attr_names.size());
    for (const auto& i : nodes) {
        for (const auto& j : nodes) {
            if (i == j) continue;
            Vec z(cs.dim);
            for (std::size_t a = 0; a < attr_names.size(); ++a)
                z(a) = attrs.values.at(i).at(attr_names[a]) ==
                               attrs.values.at(j).at(attr_names[a])
                           ? 1.0
                           : 0.0;
            cs.paths.emplace(LabelPair{i, j}, CovariatePath::constant(std::move(z)));
        }
    }
    return cs;
}

EventLog enron_preprocess(std::istream& in, int max_recipients, EnronReport* report) {
    if (max_recipients < 1) throw ConfigError("max_recipients must be at least 1");
    EnronReport local;
    EnronReport& rep = report ? *report : local;

    auto header = csv_read_row(in);
    if (!header) {
        EventLog log;
        return log;
    }
    check_header(*header, {"sender", "recipients", "timestamp"});

    struct Message {
        std::string sender;
        std::vector<std::string> recipients;
        double time;
    };
    std::vector<Message> retained;
    std::size_t row_no = 1;
    while (auto row = csv_read_row(in)) {
        ++row_no;
        if (row->size() == 1 && trim((*row)[0]).empty()) continue;
        if (row->size() != 3)
            throw ParseError(row_no, "expected 3 fields, found " +
                                         std::to_string(row->size()));
        ++rep.messages_read;
        std::string sender = trim((*row)[0]);
        if (sender.empty()) throw ParseError(row_no, "empty sender");
        auto t = parse_timestamp((*row)[2]);
        if (!t || !(*t > 0.0)) {
            rep.rejected.push_back({row_no, "nonpositive or unparseable timestamp '" +
                                                (*row)[2] + "'"});
            continue;
        }
        std::vector<std::string> recipients;
        {
            std::string list = (*row)[1];
            std::size_t start = 0;
            while (start <= list.size()) {
                std::size_t semi = list.find(';', start);
                std::string item = trim(semi == std::string::npos
                                            ? list.substr(start)
                                            : list.substr(start, semi - start));
                if (!item.empty()) recipients.push_back(item);
                if (semi == std::string::npos) break;
                start = semi + 1;
            }
        }
        if (recipients.empty()) {
            rep.rejected.push_back({row_no, "no recipients"});
            continue;
        }
        if (static_cast<int>(recipients.size()) > max_recipients) {
            ++rep.messages_dropped;
            continue;
        }
        retained.push_back({std::move(sender), std::move(recipients), *t});
    }
    rep.messages_retained = retained.size();

    EventLog log;
    if (retained.empty()) return log;

    double t0 = std::numeric_limits<double>::infinity();
    for (const auto& msg : retained) t0 = std::min(t0, msg.time);

    // transform, expand recipient lists, skip self loops
    std::map<LabelPair, std::vector<double>> events;
    double max_time = 0.0;
    for (const auto& msg : retained) {
        double t = std::log1p(msg.time - t0);
        for (const auto& r : msg.recipients) {
            if (r == msg.sender) continue;
            events[{msg.sender, r}].push_back(t);
            ++rep.events;
            max_time = std::max(max_time, t);
        }
    }
    log.horizon = max_time;
    if (log.horizon <= 0.0) {
        // all events at the origin (single retained instant); give the log a
        // unit window so the epsilon nudges below stay inside it
        log.horizon = 1.0;
    }

    // events at the transform origin sit at exactly 0; nudge them inside (0, T]
    const double eps = log.horizon * kTieEpsScale;
    for (auto& [pair, times] : events)
        for (double& t : times)
            if (t <= 0.0) {
                t = eps;
                ++rep.boundary_nudged;
            }

    rep.ties_perturbed = apply_tie_policy(events, log.horizon);
    log.events = std::move(events);
    log.validate();
    return log;
}

EventLog enron_preprocess_file(const std::string& path, int max_recipients,
                               EnronReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open messages file: " + path);
    return enron_preprocess(in, max_recipients, report);
}

}  // namespace netrate
