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

#include "mavqa/model/fusion.hpp"

#include <cmath>

#include <fmt/format.h>

namespace mavqa::model {

const std::array<std::string, kModules>& slot_names() {
    static const std::array<std::string, kModules> names = {"xmodal-visual", "xmodal-audio", "rhythm-visual",
                                                            "rhythm-audio",  "source-visual", "source-audio",
                                                            "roi"};
    return names;
}

std::string_view slot_name(Slot s) { return slot_names()[static_cast<std::size_t>(s)]; }

bool Ablation::removes(Slot s) const {
    switch (s) {
        case Slot::kXmodalVisual:
        case Slot::kXmodalAudio: return mie;
        case Slot::kRhythmVisual:
        case Slot::kRhythmAudio: return rhythm;
        case Slot::kSourceVisual:
        case Slot::kSourceAudio: return source;
        case Slot::kRoi: return roi;
    }
    return false;
}

std::string Ablation::label() const {
    std::string s;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!s.empty()) s += ",";
        s += name;
    };
    add(mie, "mie");
    add(rhythm, "rhy");
    add(source, "src");
    add(roi, "rois");
    return s;
}

Ablation parse_ablation(std::string_view list) {
    Ablation a;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t end = std::min(list.find(',', pos), list.size());
        std::string name(list.substr(pos, end - pos));
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (name == "mie" || name == "m.i.e.") a.mie = true;
        else if (name == "rhy" || name == "rhythm") a.rhythm = true;
        else if (name == "src" || name == "source") a.source = true;
        else if (name == "rois" || name == "roi") a.roi = true;
        else if (!name.empty()) throw std::invalid_argument(fmt::format("unknown module '{}' (expected mie, rhy, src, rois)", name));
        pos = end + 1;
    }
    return a;
}

FusionHead make_fusion_head(ParamSet& ps, const Initializer& init, const std::array<std::size_t, kModules>& widths,
                            std::size_t question_width, std::size_t d, std::size_t answers, std::size_t heads,
                            bool gate, std::size_t mix, const std::string& prefix) {
    if (heads == 0 || d % heads != 0)
        throw std::invalid_argument(fmt::format("fusion width {} is not divisible by {} heads", d, heads));
    FusionHead h;
    h.d = d;
    for (std::size_t i = 0; i < kModules; ++i) {
        if (static_cast<Slot>(i) != Slot::kRoi)
            h.norm[i] = make_layer_norm(ps, prefix + ".norm." + slot_names()[i], widths[i]);
        h.project[i] = make_linear(ps, init, prefix + ".project." + slot_names()[i], widths[i], d);
    }
    const std::size_t dh = d / heads;
    for (std::size_t k = 0; k < heads; ++k) {
        const std::string n = fmt::format("{}.attn{}", prefix, k);
        FusionAttention a;
        a.d_head = dh;
        a.query = make_linear(ps, init, n + ".query", question_width, dh);
        a.wk = &ps.add(n + ".wk", init.uniform_fan_in(n + ".wk", {d, dh}, d));
        a.wv = &ps.add(n + ".wv", init.uniform_fan_in(n + ".wv", {d, dh}, d));
        h.heads.push_back(a);
    }
    if (gate) h.gate = make_linear(ps, init, prefix + ".gate", question_width, d);
    if (mix > 0) h.mix = make_linear(ps, init, prefix + ".mix", d + question_width, mix);
    h.classifier = make_linear(ps, init, prefix + ".classifier", mix > 0 ? mix : d, answers);
    return h;
}

HeadOutput answer_logits(ag::Tape& tape, const FusionHead& head, const ModuleBank& bank, ag::Var question,
                         const Ablation& ablation, ag::Var gate_input) {
    std::array<ag::Var, kModules> rows;
    for (std::size_t i = 0; i < kModules; ++i) {
        const auto slot = static_cast<Slot>(i);
        if (ablation.removes(slot)) {
            rows[i] = tape.constant(Tensor({1, head.d}));
            continue;
        }
        if (!bank[i]) throw std::invalid_argument(fmt::format("module '{}' missing from the bank", slot_name(slot)));
        rows[i] = apply(tape, head.project[i], head.norm[i] ? apply(tape, *head.norm[i], *bank[i]) : *bank[i]);
    }
    ag::Var m = ag::concat_rows(rows);
    HeadOutput out;
    ag::Var attended;
    for (const auto& a : head.heads) {
        ag::Var q = apply(tape, a.query, question);
        ag::Var k = ag::matmul(m, tape.param(*a.wk));
        ag::Var v = ag::matmul(m, tape.param(*a.wv));
        ag::Var w = ag::softmax_rows(ag::scale(ag::matmul_nt(q, k), 1.0 / std::sqrt(static_cast<double>(a.d_head))));
        ag::Var o = ag::matmul(w, v);
        attended = attended.valid() ? ag::concat_cols(attended, o) : o;
        out.head_weights.push_back(w);
    }
    if (head.gate) attended = ag::mul(attended, apply(tape, *head.gate, gate_input.valid() ? gate_input : question));
    if (head.mix) attended = ag::relu(apply(tape, *head.mix, ag::concat_cols(attended, question)));
    out.logits = apply(tape, head.classifier, attended);
    return out;
}

std::array<double, kModules> HeadOutput::weights() const {
    std::array<double, kModules> mean{};
    for (const auto& w : head_weights)
        for (std::size_t i = 0; i < kModules; ++i) mean[i] += w.value()[i];
    for (auto& v : mean) v /= static_cast<double>(head_weights.size());
    return mean;
}

std::array<double, kModules> importance_scores(const std::vector<std::array<double, kModules>>& rows) {
    if (rows.empty()) throw std::invalid_argument("importance over an empty evaluation set");
    std::array<double, kModules> mean{};
    for (const auto& r : rows)
        for (std::size_t i = 0; i < kModules; ++i) mean[i] += r[i];
    for (auto& v : mean) v /= static_cast<double>(rows.size());
    return mean;
}

}  // namespace mavqa::model
