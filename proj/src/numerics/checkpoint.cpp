// Copyright 2026 The mavqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mavqa/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

namespace mavqa {
namespace {

constexpr char kMagic[4] = {'A', 'M', 'U', 'S'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U u = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool at_end() const { return pos_ == bytes_.size(); }

    template <typename T>
    T get() {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
        need(sizeof(U));
        U u = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return std::bit_cast<T>(u);
    }

    std::string get_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n)
            throw CheckpointError(fmt::format("checkpoint truncated at byte {} (need {} more)", pos_, n));
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

void Checkpoint::put(const std::string& name, Tensor value) { records_[name] = std::move(value); }

const Tensor& Checkpoint::get(const std::string& name) const {
    auto it = records_.find(name);
    if (it == records_.end()) throw CheckpointError("checkpoint has no record '" + name + "'");
    return it->second;
}

double Checkpoint::get_scalar(const std::string& name) const {
    const Tensor& t = get(name);
    if (t.size() != 1) throw CheckpointError("record '" + name + "' is not a scalar");
    return t[0];
}

double Checkpoint::get_scalar_or(const std::string& name, double fallback) const {
    return has(name) ? get_scalar(name) : fallback;
}

std::vector<std::uint8_t> Checkpoint::serialize() const {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, kCheckpointVersion);
    for (const auto& [name, t] : records_) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto e : t.shape()) put_le<std::uint64_t>(out, e);
        for (double v : t.data()) put_le<double>(out, v);
    }
    return out;
}

Checkpoint Checkpoint::deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CheckpointError("not a checkpoint: bad magic");
    Reader in(bytes.subspan(4));
    const auto version = in.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw CheckpointError(fmt::format("unsupported checkpoint version {} (this build reads {})", version,
                                          kCheckpointVersion));
    Checkpoint ck;
    while (!in.at_end()) {
        const auto name_len = in.get<std::uint32_t>();
        std::string name = in.get_string(name_len);
        const auto rank = in.get<std::uint32_t>();
        if (rank > 8) throw CheckpointError(fmt::format("record '{}' has implausible rank {}", name, rank));
        Shape shape(rank);
        for (auto& e : shape) e = static_cast<std::size_t>(in.get<std::uint64_t>());
        const std::size_t n = shape_numel(shape);
        if (n > (std::size_t{1} << 32)) throw CheckpointError("record '" + name + "' is too large");
        std::vector<double> data(n);
        for (auto& v : data) v = in.get<double>();
        ck.records_[name] = Tensor(std::move(shape), std::move(data));
    }
    return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
    const auto bytes = serialize();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointError("short write to " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

void Checkpoint::put_params(const ParamSet& params, const std::string& prefix) {
    for (const auto& p : params) {
        put(prefix + p.name, p.value);
        if (p.frozen) put_scalar("frozen/" + p.name, 1.0);
    }
}

void Checkpoint::load_params(ParamSet& params, const std::string& prefix) const {
    for (auto& p : params) {
        const Tensor& t = get(prefix + p.name);
        if (t.shape() != p.value.shape())
            throw CheckpointError(fmt::format("parameter '{}' has shape {} in checkpoint, model expects {}", p.name,
                                              shape_str(t.shape()), shape_str(p.value.shape())));
        p.value = t;
        p.frozen = get_scalar_or("frozen/" + p.name, 0.0) != 0.0;
    }
}

void Checkpoint::put_optimizer(const OptimState& opt, const std::string& prefix) {
    put_scalar(prefix + "step", static_cast<double>(opt.step));
    put_scalar(prefix + "base_lr", opt.base_lr);
    put_scalar(prefix + "epoch", opt.epoch);
    put_scalar(prefix + "beta1", opt.hyper.beta1);
    put_scalar(prefix + "beta2", opt.hyper.beta2);
    put_scalar(prefix + "eps", opt.hyper.eps);
    put_scalar(prefix + "weight_decay", opt.hyper.weight_decay);
    put_scalar(prefix + "decay_every", opt.decay_every);
    put_scalar(prefix + "decay_factor", opt.decay_factor);
    for (const auto& [name, m] : opt.first_moment) put(prefix + "m/" + name, m);
    for (const auto& [name, v] : opt.second_moment) put(prefix + "v/" + name, v);
}

void Checkpoint::load_optimizer(OptimState& opt, const std::string& prefix) const {
    opt.step = static_cast<std::uint64_t>(get_scalar(prefix + "step"));
    opt.base_lr = get_scalar(prefix + "base_lr");
    opt.epoch = static_cast<int>(get_scalar(prefix + "epoch"));
    opt.hyper.beta1 = get_scalar(prefix + "beta1");
    opt.hyper.beta2 = get_scalar(prefix + "beta2");
    opt.hyper.eps = get_scalar(prefix + "eps");
    opt.hyper.weight_decay = get_scalar(prefix + "weight_decay");
    opt.decay_every = static_cast<int>(get_scalar_or(prefix + "decay_every", 5));
    opt.decay_factor = get_scalar_or(prefix + "decay_factor", 0.5);
    opt.first_moment.clear();
    opt.second_moment.clear();
    const std::string mp = prefix + "m/", vp = prefix + "v/";
    for (const auto& [name, t] : records_) {
        if (name.starts_with(mp)) opt.first_moment.emplace(name.substr(mp.size()), t);
        if (name.starts_with(vp)) opt.second_moment.emplace(name.substr(vp.size()), t);
    }
}

}  // namespace mavqa
