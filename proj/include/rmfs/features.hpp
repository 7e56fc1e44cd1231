#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmfs/sim.hpp"

namespace rmfs {

// Coordinate encoding of a decision point: the (x,y) of up to `r` free
// locations in ascending id order, then the (x,y) of the shelves of the next
// `h` pending orders in deadline order, both padded with (-1,-1). Orders
// whose shelf is currently carried have no coordinates and are skipped.
// Length is always 2*(r+h).
std::vector<float> extract_features(const SimState& state, int r, int h);

// Same encoding from raw pieces; `order_locations` are the shelf coordinates
// of the pending orders already in deadline order, carried ones removed.
std::vector<float> encode_features(const Layout& layout,
                                   std::span<const std::int16_t> free_locations,
                                   std::span<const Coord> order_locations, int r, int h);

struct ExperienceRecord {
    std::vector<float> features;
    std::uint16_t label = 0;  // location id chosen by the expert
};

struct DatasetMeta {
    std::int32_t r = 0;
    std::int32_t h = 0;
    std::int32_t locations = 0;
    std::uint64_t layout_fingerprint = 0;
    std::uint64_t seed = 0;
    std::string source;  // expert tag, e.g. "MCTS(5)"
};

struct Dataset {
    DatasetMeta meta;
    std::vector<ExperienceRecord> records;

    std::size_t feature_width() const {
        return 2 * static_cast<std::size_t>(meta.r + meta.h);
    }
};

struct DatasetGenConfig {
    SimConfig sim{};            // instance template; per-shard seeds derive from sim.seed
    int horizon = 5;            // expert lookahead depth
    int trajectories = 300;     // expert budget per decision
    double exploration = 1.0 / 16.0;
    std::int64_t target_records = 1000;
    std::int64_t actions_per_instance = 1000;  // shard length
};

// Runs live-reveal instances where every storage decision is made by the
// tree-search expert, recording (features, chosen location) pairs until the
// target size is reached. Shards are independently seeded instances merged
// in shard order, so output is a pure function of the config.
Dataset generate_dataset(const DatasetGenConfig& cfg);

// Disjoint shuffled split; the test side gets ceil(fraction * n) records.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                          std::uint64_t seed);

// Fixed-record binary container (little-endian float32 features, uint16
// label) behind a self-describing header.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Plain-text export for inspection: header row, one record per line.
void export_dataset_csv(const Dataset& ds, const std::string& path);

}  // namespace rmfs
