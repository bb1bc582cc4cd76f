#include "netrate/dataset_io.hpp"

#include "netrate/csv.hpp"
#include "netrate/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace netrate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    return in;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path base(dir);

    {
        auto out = open_out(base / "nodes.csv");
        out << "node\n";
        for (const auto& label : ds.nodes().labels()) out << csv_escape(label) << '\n';
    }
    {
        auto out = open_out(base / "events.csv");
        out << "sender,recipient,timestamp\n";
        for (const PairData& pd : ds.pairs()) {
            const std::string s = csv_escape(ds.nodes().label(pd.sender));
            const std::string r = csv_escape(ds.nodes().label(pd.recipient));
            for (double t : pd.events)
                out << s << ',' << r << ',' << format_double(t) << '\n';
        }
    }
    {
        auto out = open_out(base / "covariates.csv");
        out << "sender,recipient,start_time";
        for (int k = 1; k <= ds.dim(); ++k) out << ",z" << k;
        out << '\n';
        for (const PairData& pd : ds.pairs()) {
            const std::string s = csv_escape(ds.nodes().label(pd.sender));
            const std::string r = csv_escape(ds.nodes().label(pd.recipient));
            const CovariatePath& path = pd.covariates;
            for (std::size_t seg = 0; seg < path.starts.size(); ++seg) {
                out << s << ',' << r << ',' << format_double(path.starts[seg]);
                for (int k = 0; k < ds.dim(); ++k)
                    out << ',' << format_double(path.values[seg](k));
                out << '\n';
            }
        }
    }
    {
        json meta;
        meta["horizon"] = ds.horizon();
        meta["p"] = ds.dim();
        meta["n"] = ds.nodes().count();
        auto out = open_out(base / "meta.json");
        out << meta.dump(2) << '\n';
    }
}

Dataset load_dataset(const std::string& dir) {
    const fs::path base(dir);
    if (!fs::exists(base)) throw ValidationError("dataset directory not found: " + dir);

    json meta;
    {
        auto in = open_in(base / "meta.json");
        try {
            in >> meta;
        } catch (const json::exception& e) {
            throw ValidationError("meta.json: " + std::string(e.what()));
        }
    }
    if (!meta.contains("horizon") || !meta.contains("p") || !meta.contains("n"))
        throw ValidationError("meta.json must contain horizon, p and n");
    const double horizon = meta["horizon"].get<double>();
    const int p = meta["p"].get<int>();
    const int n = meta["n"].get<int>();

    std::vector<std::string> labels;
    {
        auto in = open_in(base / "nodes.csv");
        auto header = csv_read_row(in);
        if (!header || header->empty() || (*header)[0] != "node")
            throw ValidationError("nodes.csv must start with a 'node' header");
        while (auto row = csv_read_row(in)) {
            if (row->size() == 1 && (*row)[0].empty()) continue;
            labels.push_back((*row)[0]);
        }
    }
    if (static_cast<int>(labels.size()) != n)
        throw ValidationError("nodes.csv row count does not match meta.json n");

    CovariateSet covs;
    covs.dim = p;
    {
        auto in = open_in(base / "covariates.csv");
        auto header = csv_read_row(in);
        if (!header || header->size() != static_cast<std::size_t>(3 + p))
            throw ValidationError("covariates.csv header must be sender,recipient,start_time,z1..zp");
        std::size_t row_no = 1;
        while (auto row = csv_read_row(in)) {
            ++row_no;
            if (row->size() == 1 && (*row)[0].empty()) continue;
            if (row->size() != static_cast<std::size_t>(3 + p))
                throw ParseError(row_no, "covariates.csv: wrong field count");
            LabelPair key{(*row)[0], (*row)[1]};
            auto start_v = csv_parse_double((*row)[2]);
            if (!start_v) throw ParseError(row_no, "covariates.csv: unparseable number");
            double start = *start_v;
            Vec z(p);
            for (int k = 0; k < p; ++k) {
                auto zv = csv_parse_double((*row)[3 + k]);
                if (!zv) throw ParseError(row_no, "covariates.csv: unparseable number");
                z(k) = *zv;
            }
            CovariatePath& path = covs.paths[key];
            path.starts.push_back(start);
            path.values.push_back(std::move(z));
        }
    }

    EventLog log;
    log.horizon = horizon;
    {
        auto in = open_in(base / "events.csv");
        auto header = csv_read_row(in);
        if (!header || header->size() != 3)
            throw ValidationError("events.csv header must be sender,recipient,timestamp");
        std::size_t row_no = 1;
        while (auto row = csv_read_row(in)) {
            ++row_no;
            if (row->size() == 1 && (*row)[0].empty()) continue;
            if (row->size() != 3) throw ParseError(row_no, "events.csv: wrong field count");
            auto tv = csv_parse_double((*row)[2]);
            if (!tv) throw ParseError(row_no, "events.csv: unparseable timestamp");
            double t = *tv;
            log.events[{(*row)[0], (*row)[1]}].push_back(t);
        }
    }
    for (auto& [pair, times] : log.events) std::sort(times.begin(), times.end());

    return Dataset::build(NodeSet(std::move(labels)), log, covs);
}

}  // namespace netrate
