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

#include "mavqa/model/train.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mavqa/numerics/ops.hpp"

namespace mavqa::model {

RSTargets rs_targets(const annotate::RhythmTimeline& rhythm, const annotate::SourceTimeline& source) {
    RSTargets t;
    t.rhythm = Tensor({rhythm.labels.size()});
    for (std::size_t i = 0; i < rhythm.labels.size(); ++i) t.rhythm[i] = rhythm.labels[i];
    const double n = static_cast<double>(source.counts.size());
    t.source = Tensor({source.classes.size()});
    for (std::size_t c = 0; c < source.classes.size(); ++c) t.source[c] = source.totals[c] / n;
    return t;
}

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with our own draws so the order does not depend on the
    // standard library's shuffle.
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    return order;
}

}  // namespace

std::vector<double> pretrain(QAModel& m, std::span<const ClipCache> clips, std::span<const RSTargets> targets,
                             const PretrainConfig& cfg, OptimState& opt) {
    if (clips.size() != targets.size()) throw std::invalid_argument("one target per clip required");
    if (clips.empty() || cfg.batch == 0) throw std::invalid_argument("empty pretraining set");
    opt.base_lr = cfg.lr;
    opt.epoch = 0;
    opt.decay_every = std::numeric_limits<int>::max();  // constant rate
    std::vector<double> losses;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        const auto order = shuffled(clips.size(), splitmix64(cfg.seed ^ (e + 1)));
        for (std::size_t s = 0; s < order.size(); s += cfg.batch) {
            std::vector<RSExample> batch;
            for (std::size_t k = s; k < std::min(s + cfg.batch, order.size()); ++k)
                batch.push_back({&clips[order[k]].features, targets[order[k]]});
            losses.push_back(pretrain_step(m.params, m.rs, batch, opt));
        }
    }
    return losses;
}

double finetune_step(QAModel& m, std::span<const ClipCache> clips, std::span<const synth::QASample* const> batch,
                     OptimState& opt, const Ablation& ablation) {
    if (batch.empty()) throw std::invalid_argument("empty finetuning batch");
    m.params.zero_grad();
    const double inv = 1.0 / static_cast<double>(batch.size());
    double total = 0;
    for (const auto* s : batch) {
        if (s->answer >= m.cfg.answers)
            throw std::out_of_range(fmt::format("answer index {} outside vocabulary of {}", s->answer, m.cfg.answers));
        ag::Tape tape;
        const auto out = forward(tape, m, clips[s->clip], s->tokens, ablation);
        ag::Var loss = ag::softmax_cross_entropy(out.logits, s->answer);
        total += loss.value()[0];
        tape.backward(ag::scale(loss, inv));
    }
    adam_step(m.params, opt);
    return total * inv;
}

std::vector<EpochRecord> finetune(QAModel& m, std::span<const ClipCache> clips,
                                  std::span<const synth::QASample> samples, const TrainConfig& cfg, OptimState& opt,
                                  const Ablation& ablation, const EpochCallback& on_epoch) {
    if (samples.empty() || cfg.batch == 0) throw std::invalid_argument("empty training set");
    for (const auto& p : m.params)
        if (p.name.starts_with("rs.") && !p.frozen)
            throw std::logic_error("pretraining encoders must be frozen before finetuning (" + p.name + ")");
    opt.base_lr = cfg.lr;
    opt.decay_every = cfg.decay_every;
    opt.decay_factor = cfg.decay_factor;
    std::vector<EpochRecord> log;
    const int first = opt.epoch;
    for (int e = first; e < first + static_cast<int>(cfg.epochs); ++e) {
        opt.epoch = e;
        const auto order = shuffled(samples.size(), splitmix64(cfg.seed ^ static_cast<std::uint64_t>(e + 1)));
        double sum = 0;
        std::size_t steps = 0;
        std::vector<const synth::QASample*> batch;
        for (std::size_t s = 0; s < order.size(); s += cfg.batch) {
            batch.clear();
            for (std::size_t k = s; k < std::min(s + cfg.batch, order.size()); ++k) batch.push_back(&samples[order[k]]);
            sum += finetune_step(m, clips, batch, opt, ablation);
            ++steps;
        }
        EpochRecord rec{e, opt.current_lr(), sum / static_cast<double>(steps)};
        log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    opt.epoch = first + static_cast<int>(cfg.epochs);
    return log;
}

EvalReport evaluate(const QAModel& m, std::span<const ClipCache> clips, std::span<const synth::QASample> samples,
                    const Ablation& ablation) {
    EvalReport r;
    for (const auto& s : samples) {
        ag::Tape tape;
        const auto out = forward(tape, m, clips[s.clip], s.tokens, ablation);
        const auto& logits = out.logits.value();
        const bool ok = ops::argmax(logits.data()) == s.answer;
        auto& c = r.categories[s.category];
        ++c.total;
        ++r.total;
        if (ok) {
            ++c.correct;
            ++r.correct;
        }
        const auto w = out.weights();
        for (std::size_t i = 0; i < kModules; ++i) c.importance[i] += w[i];
    }
    for (auto& [cat, c] : r.categories)
        for (auto& v : c.importance) v /= static_cast<double>(c.total);
    return r;
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [cat, c] : r.categories)
        cats[std::string(synth::category_name(cat))] = {
            {"total", c.total}, {"correct", c.correct}, {"accuracy", c.accuracy()}};
    return {{"total", r.total}, {"correct", r.correct}, {"accuracy", r.accuracy()}, {"categories", cats}};
}

nlohmann::json importance_json(const EvalReport& r) {
    nlohmann::json rows = nlohmann::json::object();
    for (const auto& [cat, c] : r.categories) {
        nlohmann::json row = nlohmann::json::object();
        for (std::size_t i = 0; i < kModules; ++i) row[slot_names()[i]] = c.importance[i];
        rows[std::string(synth::category_name(cat))] = row;
    }
    return {{"modules", slot_names()}, {"rows", rows}};
}

}  // namespace mavqa::model
