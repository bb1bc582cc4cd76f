#pragma once

#include "netrate/data.hpp"

#include <string>

namespace netrate {

/// Canonical on-disk form: a directory with events.csv, nodes.csv,
/// covariates.csv (`sender,recipient,start_time,z1,...,zp`) and meta.json
/// ({horizon, p, n}). Bytes are deterministic for a given dataset.
void save_dataset(const Dataset& ds, const std::string& dir);

Dataset load_dataset(const std::string& dir);

}  // namespace netrate
