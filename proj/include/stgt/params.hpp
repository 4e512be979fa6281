#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stgt/rng.hpp"
#include "stgt/tensor.hpp"

namespace stgt {

// All learnables, keyed by dotted names (mp.0.epsilon, serializer.basis, ...).
// Values are immutable during a forward/backward pass; the optimizer step is
// the single mutation point. Iteration order is name-sorted, which makes
// checkpoints and optimizer sweeps deterministic.
class ParameterStore {
public:
    struct Slot {
        Tensor value;
        Tensor grad;
    };

    Tensor& add(const std::string& name, Tensor init) {
        auto [it, inserted] = slots_.emplace(name, Slot{});
        if (!inserted) throw ConfigError("parameter already registered: " + name);
        it->second.value = std::move(init);
        it->second.grad = Tensor::zeros(it->second.value.rows, it->second.value.cols);
        return it->second.value;
    }

    bool has(const std::string& name) const { return slots_.count(name) != 0; }

    Slot& slot(const std::string& name) {
        auto it = slots_.find(name);
        if (it == slots_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    const Slot& slot(const std::string& name) const {
        auto it = slots_.find(name);
        if (it == slots_.end()) throw ConfigError("unknown parameter: " + name);
        return it->second;
    }

    void zero_grads() {
        for (auto& [name, s] : slots_) {
            std::fill(s.grad.data.begin(), s.grad.data.end(), 0.0);
        }
    }

    std::map<std::string, Slot>& slots() { return slots_; }
    const std::map<std::string, Slot>& slots() const { return slots_; }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& [name, s] : slots_) n += s.value.size();
        return n;
    }

    // flat vector of all parameter values, name-sorted order
    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(total_size());
        for (const auto& [name, s] : slots_)
            out.insert(out.end(), s.value.data.begin(), s.value.data.end());
        return out;
    }

    std::vector<double> flatten_grads() const {
        std::vector<double> out;
        out.reserve(total_size());
        for (const auto& [name, s] : slots_)
            out.insert(out.end(), s.grad.data.begin(), s.grad.data.end());
        return out;
    }

    void unflatten(std::span<const double> flat) {
        std::size_t off = 0;
        for (auto& [name, s] : slots_) {
            if (off + s.value.size() > flat.size())
                throw ConfigError("unflatten: vector too short");
            std::copy(flat.begin() + off, flat.begin() + off + s.value.size(),
                      s.value.data.begin());
            off += s.value.size();
        }
        if (off != flat.size()) throw ConfigError("unflatten: vector too long");
    }

    // ---- checkpoint io: params.bin (raw doubles) + manifest.json ----

    void save(const std::filesystem::path& dir, const nlohmann::json& config,
              const std::string& config_hash) const {
        std::filesystem::create_directories(dir);
        nlohmann::json manifest;
        manifest["config"] = config;
        manifest["config_hash"] = config_hash;
        nlohmann::json plist = nlohmann::json::array();
        std::ofstream bin(dir / "params.bin", std::ios::binary);
        for (const auto& [name, s] : slots_) {
            plist.push_back({{"name", name}, {"rows", s.value.rows}, {"cols", s.value.cols}});
            bin.write(reinterpret_cast<const char*>(s.value.data.data()),
                      static_cast<std::streamsize>(s.value.size() * sizeof(double)));
        }
        manifest["params"] = plist;
        std::ofstream mf(dir / "manifest.json");
        mf << manifest.dump(2) << "\n";
    }

    static nlohmann::json load_manifest(const std::filesystem::path& dir) {
        std::ifstream mf(dir / "manifest.json");
        if (!mf) throw ParseError("cannot open " + (dir / "manifest.json").string());
        nlohmann::json manifest;
        mf >> manifest;
        return manifest;
    }

    // Loads values into an already-built store; shapes must match.
    void load(const std::filesystem::path& dir) {
        nlohmann::json manifest = load_manifest(dir);
        std::ifstream bin(dir / "params.bin", std::ios::binary);
        if (!bin) throw ParseError("cannot open " + (dir / "params.bin").string());
        std::vector<std::string> mismatches;
        for (const auto& p : manifest["params"]) {
            std::string name = p["name"];
            std::size_t rows = p["rows"], cols = p["cols"];
            Tensor buf(rows, cols);
            bin.read(reinterpret_cast<char*>(buf.data.data()),
                     static_cast<std::streamsize>(buf.size() * sizeof(double)));
            if (!bin) throw ParseError("params.bin truncated at " + name);
            auto it = slots_.find(name);
            if (it == slots_.end() || it->second.value.rows != rows ||
                it->second.value.cols != cols) {
                mismatches.push_back(name + " (" + std::to_string(rows) + "x" +
                                     std::to_string(cols) + ")");
                continue;
            }
            it->second.value = std::move(buf);
        }
        if (!mismatches.empty()) {
            std::string msg = "incompatible checkpoint, mismatched parameters:";
            for (const auto& m : mismatches) msg += " " + m;
            throw ConfigError(msg);
        }
    }

private:
    std::map<std::string, Slot> slots_;
};

// ---- init helpers ----

inline Tensor gauss_init(Rng& rng, std::size_t r, std::size_t c, double stddev) {
    Tensor t(r, c);
    for (double& v : t.data) v = stddev * rng.gauss();
    return t;
}

inline Tensor xavier_init(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    return gauss_init(rng, fan_in, fan_out,
                      std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
}

inline Tensor ones_row(std::size_t c) {
    Tensor t(1, c);
    std::fill(t.data.begin(), t.data.end(), 1.0);
    return t;
}

// FNV-1a over a string; used to stamp checkpoints with their config.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace stgt
