#include "rmfs/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "rmfs/mcts.hpp"
#include "rmfs/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset container assumes a little-endian host");

namespace rmfs {

std::vector<float> encode_features(const Layout& layout,
                                   std::span<const std::int16_t> free_locations,
                                   std::span<const Coord> order_locations, int r, int h) {
    std::vector<float> out;
    out.reserve(2 * static_cast<std::size_t>(r + h));
    const std::size_t nf = std::min<std::size_t>(free_locations.size(), static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < nf; ++i) {
        const Coord c = layout.cell(free_locations[i]);
        out.push_back(static_cast<float>(c.x));
        out.push_back(static_cast<float>(c.y));
    }
    for (std::size_t i = nf; i < static_cast<std::size_t>(r); ++i) {
        out.push_back(-1.0f);
        out.push_back(-1.0f);
    }
    const std::size_t no = std::min<std::size_t>(order_locations.size(), static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < no; ++i) {
        out.push_back(static_cast<float>(order_locations[i].x));
        out.push_back(static_cast<float>(order_locations[i].y));
    }
    for (std::size_t i = no; i < static_cast<std::size_t>(h); ++i) {
        out.push_back(-1.0f);
        out.push_back(-1.0f);
    }
    return out;
}

std::vector<float> extract_features(const SimState& state, int r, int h) {
    std::vector<Coord> order_locs;
    order_locs.reserve(static_cast<std::size_t>(h));
    for (const Order& o : state.pending_orders()) {
        if (static_cast<int>(order_locs.size()) == h) break;
        const int loc = state.location_of_shelf(o.shelf);
        if (loc < 0) continue;  // carried: no coordinates to report
        order_locs.push_back(state.layout().cell(loc));
    }
    return encode_features(state.layout(), state.free_locations(), order_locs, r, h);
}

Dataset generate_dataset(const DatasetGenConfig& cfg) {
    if (cfg.target_records < 1) throw std::invalid_argument("dataset: target size must be >= 1");
    if (cfg.actions_per_instance < 1) {
        throw std::invalid_argument("dataset: actions_per_instance must be >= 1");
    }

    Dataset ds;
    const Layout layout = Layout::build(cfg.sim.layout);
    ds.meta.r = cfg.sim.robots;
    ds.meta.h = cfg.horizon;
    ds.meta.locations = layout.location_count();
    ds.meta.layout_fingerprint = layout.fingerprint();
    ds.meta.seed = cfg.sim.seed;
    ds.meta.source = "MCTS(" + std::to_string(cfg.horizon) + ")";
    ds.records.reserve(static_cast<std::size_t>(cfg.target_records));

    const MctsParams expert{cfg.horizon, cfg.trajectories, cfg.exploration};
    std::int64_t remaining = cfg.target_records;
    for (std::uint64_t shard = 0; remaining > 0; ++shard) {
        SimConfig sim_cfg = cfg.sim;
        sim_cfg.seed = mix_seed(cfg.sim.seed, shard);
        sim_cfg.action_budget = std::min<std::int64_t>(cfg.actions_per_instance, remaining);
        SimState sim = SimState::create(sim_cfg);
        while (const auto dp = sim.advance()) {
            ExperienceRecord rec;
            rec.features = extract_features(sim, ds.meta.r, ds.meta.h);
            rec.label = static_cast<std::uint16_t>(mcts_decide(sim, expert));
            sim.apply_action(rec.label);
            ds.records.push_back(std::move(rec));
            --remaining;
        }
    }
    return ds;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double test_fraction,
                                          std::uint64_t seed) {
    if (ds.records.empty()) throw std::invalid_argument("split: dataset is empty");
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        throw std::invalid_argument("split: fraction must be in (0, 1)");
    }
    std::vector<std::size_t> index(ds.records.size());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
    Rng rng(seed);
    shuffle(index.data(), index.size(), rng);

    const std::size_t test_size = static_cast<std::size_t>(
        std::ceil(test_fraction * static_cast<double>(ds.records.size())));
    Dataset test{ds.meta, {}};
    Dataset train{ds.meta, {}};
    test.records.reserve(test_size);
    train.records.reserve(ds.records.size() - test_size);
    for (std::size_t i = 0; i < index.size(); ++i) {
        (i < test_size ? test : train).records.push_back(ds.records[index[i]]);
    }
    return {std::move(train), std::move(test)};
}

namespace {

constexpr char kMagic[8] = {'R', 'M', 'F', 'S', 'D', 'S', '0', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("dataset: truncated file");
    return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("dataset: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, ds.meta.r);
    write_pod(os, ds.meta.h);
    write_pod(os, ds.meta.locations);
    write_pod(os, ds.meta.layout_fingerprint);
    write_pod(os, ds.meta.seed);
    char tag[32] = {};
    std::snprintf(tag, sizeof(tag), "%s", ds.meta.source.c_str());
    os.write(tag, sizeof(tag));
    write_pod(os, static_cast<std::uint64_t>(ds.records.size()));
    const std::size_t width = ds.feature_width();
    for (const ExperienceRecord& rec : ds.records) {
        if (rec.features.size() != width) {
            throw std::runtime_error("dataset: record width mismatch");
        }
        os.write(reinterpret_cast<const char*>(rec.features.data()),
                 static_cast<std::streamsize>(width * sizeof(float)));
        write_pod(os, rec.label);
    }
    if (!os) throw std::runtime_error("dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("dataset: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("dataset: bad magic in " + path);
    }
    Dataset ds;
    ds.meta.r = read_pod<std::int32_t>(is);
    ds.meta.h = read_pod<std::int32_t>(is);
    ds.meta.locations = read_pod<std::int32_t>(is);
    ds.meta.layout_fingerprint = read_pod<std::uint64_t>(is);
    ds.meta.seed = read_pod<std::uint64_t>(is);
    char tag[32];
    is.read(tag, sizeof(tag));
    tag[31] = '\0';
    ds.meta.source = tag;
    const auto count = read_pod<std::uint64_t>(is);
    if (ds.meta.r < 0 || ds.meta.h < 0 || ds.meta.locations < 1) {
        throw std::runtime_error("dataset: corrupt header in " + path);
    }
    const std::size_t width = ds.feature_width();
    ds.records.resize(count);
    for (auto& rec : ds.records) {
        rec.features.resize(width);
        is.read(reinterpret_cast<char*>(rec.features.data()),
                static_cast<std::streamsize>(width * sizeof(float)));
        rec.label = read_pod<std::uint16_t>(is);
        if (!is) throw std::runtime_error("dataset: truncated records in " + path);
        if (rec.label >= ds.meta.locations) {
            throw std::runtime_error("dataset: label out of range in " + path);
        }
    }
    return ds;
}

void export_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("dataset: cannot open " + path + " for writing");
    const std::size_t width = ds.feature_width();
    for (std::size_t i = 0; i < width; ++i) os << 'f' << i << ',';
    os << "label\n";
    for (const ExperienceRecord& rec : ds.records) {
        for (const float f : rec.features) os << f << ',';
        os << rec.label << '\n';
    }
}

}  // namespace rmfs
