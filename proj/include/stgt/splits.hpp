#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "stgt/graph.hpp"
#include "stgt/rng.hpp"
#include "stgt/tensor.hpp"

namespace stgt {

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
};

// Deterministic shuffle + contiguous slicing.
inline DatasetSplit split_dataset(std::size_t store_size, std::array<double, 3> fractions,
                                  std::uint64_t seed) {
    for (double f : fractions)
        if (f <= 0.0) throw ConfigError("split_dataset: fractions must be positive");
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("split_dataset: fractions must sum to 1");
    if (store_size < 3) throw ConfigError("split_dataset: need at least 3 examples");

    std::vector<std::size_t> idx(store_size);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(mix_seed(seed, 0x73706c6974ULL));
    rng.shuffle(idx);

    auto n_train = static_cast<std::size_t>(std::floor(fractions[0] * store_size + 0.5));
    auto n_valid = static_cast<std::size_t>(std::floor(fractions[1] * store_size + 0.5));
    n_train = std::min(n_train, store_size - 2);
    n_train = std::max<std::size_t>(n_train, 1);
    n_valid = std::min(std::max<std::size_t>(n_valid, 1), store_size - n_train - 1);

    DatasetSplit s;
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.valid.assign(idx.begin() + n_train, idx.begin() + n_train + n_valid);
    s.test.assign(idx.begin() + n_train + n_valid, idx.end());
    return s;
}

inline std::vector<std::size_t> load_index_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError("cannot open split file " + p.string());
    std::vector<std::size_t> idx;
    long long v;
    while (in >> v) {
        if (v < 0) throw ParseError("negative index in " + p.string());
        idx.push_back(static_cast<std::size_t>(v));
    }
    return idx;
}

// Split files: one index per line, named train.idx / valid.idx / test.idx.
inline DatasetSplit load_split_files(const std::filesystem::path& dir, std::size_t store_size) {
    DatasetSplit s;
    s.train = load_index_file(dir / "train.idx");
    s.valid = load_index_file(dir / "valid.idx");
    s.test = load_index_file(dir / "test.idx");
    for (const auto* part : {&s.train, &s.valid, &s.test})
        for (std::size_t i : *part)
            if (i >= store_size)
                throw ParseError("split index " + std::to_string(i) + " out of range");
    return s;
}

}  // namespace stgt
