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

// Command-line entry point: one binary, one subcommand per pipeline stage.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mavqa/annotate/rhythm.hpp"
#include "mavqa/annotate/source.hpp"
#include "mavqa/audio/wav.hpp"
#include "mavqa/model/train.hpp"
#include "mavqa/pipeline/config.hpp"
#include "mavqa/pipeline/stages.hpp"
#include "mavqa/synth/dataset.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mavqa;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Failure inside a named stage; reported with exit code 1.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string s, const std::string& what) : std::runtime_error(what), stage(std::move(s)) {}
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string run_dir;
};

// Git blob hash of one file; for a directory, the hash of its sorted
// "<blob hash> <relative path>" listing.
std::string content_hash(const fs::path& p) {
    auto blob = [](const fs::path& f) {
        std::ifstream in(f, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return pipeline::sha1_hex("blob " + std::to_string(bytes.size()) + '\0' + bytes);
    };
    if (!fs::is_directory(p)) return blob(p);
    std::vector<std::string> lines;
    for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) lines.push_back(blob(e.path()) + " " + fs::relative(e.path(), p).generic_string());
    std::sort(lines.begin(), lines.end());
    std::string listing;
    for (const auto& l : lines) listing += l + "\n";
    return pipeline::sha1_hex("tree " + std::to_string(listing.size()) + '\0' + listing);
}

class Run {
public:
    Run(const std::string& stage, const Common& c) : stage_(stage) {
        cfg_ = c.config.empty() ? pipeline::default_run_config() : pipeline::load_run_config(c.config);
        if (c.seed) pipeline::override_seed(cfg_, *c.seed);
        if (!c.run_dir.empty()) cfg_.run_dir = c.run_dir;
    }

    pipeline::RunConfig& cfg() { return cfg_; }

    /// Input path: as given, else relative to the run directory. A missing
    /// input is a configuration error.
    fs::path input(const std::string& flag, const std::string& p) {
        fs::path path = p;
        if (!fs::exists(path) && path.is_relative() && fs::exists(cfg_.run_dir / path)) path = cfg_.run_dir / path;
        if (!fs::exists(path)) throw pipeline::ConfigError(fmt::format("{}: path '{}' does not exist", flag, p));
        inputs_[display(path)] = content_hash(path);
        return path;
    }

    /// Output path: relative paths land in the run directory.
    fs::path output(const std::string& p) {
        fs::path path = fs::path(p).is_relative() ? cfg_.run_dir / p : fs::path(p);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        outputs_.push_back(path);
        return path;
    }

    Catalog catalog() { return load_catalog(input("data.classes", cfg_.data.classes.string())); }

    template <typename F>
    auto stage(const std::string& name, F&& f) {
        try {
            return f();
        } catch (const pipeline::ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
    }

    /// Records this stage in <run_dir>/manifest.json, keyed by stage name.
    void finish() {
        fs::create_directories(cfg_.run_dir);
        const fs::path mpath = cfg_.run_dir / "manifest.json";
        json manifest = json::object();
        if (fs::exists(mpath)) {
            std::ifstream in(mpath);
            manifest = json::parse(in, nullptr, false);
            if (manifest.is_discarded() || !manifest.is_object()) manifest = json::object();
        }
        json config_json = pipeline::to_json(cfg_);
        config_json.erase("run_dir");
        json outs = json::object();
        for (const auto& o : outputs_) outs[display(o)] = content_hash(o);
        manifest["stages"][stage_] = {{"command", stage_},
                                      {"seed", cfg_.seed},
                                      {"config_hash", pipeline::config_hash(cfg_)},
                                      {"config", config_json},
                                      {"inputs", inputs_},
                                      {"outputs", outs}};
        std::ofstream(mpath) << manifest.dump(2) << "\n";
    }

private:
    // Paths inside the run directory are recorded relative to it, so that
    // identical runs in different directories give identical manifests.
    std::string display(const fs::path& p) const {
        const auto rel = fs::relative(p, cfg_.run_dir);
        if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
        return p.generic_string();
    }

    std::string stage_;
    pipeline::RunConfig cfg_;
    std::map<std::string, std::string> inputs_;
    std::vector<fs::path> outputs_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

void save_checkpoint(const Checkpoint& ck, const fs::path& path) { ck.save(path); }

struct Loaded {
    synth::Dataset ds;
    Catalog catalog;
};

Loaded load_data(Run& run, const std::string& dir) {
    Loaded l{synth::load_dataset(run.input("--data", dir)), run.catalog()};
    return l;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("mavqa");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    if (const char* lvl = std::getenv("MAVQA_LOG_LEVEL")) spdlog::cfg::helpers::load_levels(lvl);

    CLI::App app{"mavqa: synthetic music audio-visual question answering pipeline"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "run configuration (TOML)");
        sub->add_option("--seed", common.seed, "override every seed in the configuration");
        sub->add_option("--run-dir", common.run_dir, "directory for outputs and the manifest");
    };

    // gen-data
    std::optional<std::size_t> gen_n, gen_per;
    std::string gen_out = "synth";
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic clip and question set");
    gen->add_option("--n", gen_n, "number of clips");
    gen->add_option("--per-category", gen_per, "questions per category per clip");
    gen->add_option("--out", gen_out, "output directory");
    add_common(gen);

    // annotate-rhythm / annotate-source
    std::string ann_in, ann_out, ann_classes;
    std::optional<double> ann_seg;
    auto* arh = app.add_subcommand("annotate-rhythm", "per-segment tempo and rhythm change labels of a WAV file");
    auto* asrc = app.add_subcommand("annotate-source", "per-segment instrument presence of a WAV file");
    for (auto* s : {arh, asrc}) {
        s->add_option("--in", ann_in, "input WAV")->required();
        s->add_option("--out", ann_out, "output JSON")->required();
        s->add_option("--segment-seconds", ann_seg, "segment length");
        add_common(s);
    }
    asrc->add_option("--classes", ann_classes, "class list JSON");

    // pretrain
    std::string data_dir = "synth", rs_out = "rs.ckpt", report = "pretrain_report.json";
    std::optional<std::size_t> pre_epochs;
    std::optional<double> pre_lr;
    auto* pre = app.add_subcommand("pretrain", "pretrain the rhythm and source encoders on annotations");
    pre->add_option("--data", data_dir, "dataset directory");
    pre->add_option("--epochs", pre_epochs, "pretraining epochs");
    pre->add_option("--lr", pre_lr, "pretraining learning rate");
    pre->add_option("--out", rs_out, "encoder checkpoint");
    pre->add_option("--report", report, "loss trace JSON");
    add_common(pre);

    // train
    std::string rs_in = "rs.ckpt", model_out = "model.ckpt", train_report = "train_report.json", modules;
    auto* trn = app.add_subcommand("train", "finetune the answer model over frozen encoders");
    trn->add_option("--data", data_dir, "dataset directory");
    trn->add_option("--rs", rs_in, "encoder checkpoint from pretrain");
    trn->add_option("--out", model_out, "model checkpoint");
    trn->add_option("--report", train_report, "epoch trace JSON");
    trn->add_option("--ablate", modules, "modules to remove (mie,rhy,src,rois)");
    add_common(trn);

    // eval / importance
    std::string ckpt = "model.ckpt", eval_report = "report.json", imp_out = "importance.json";
    auto* evl = app.add_subcommand("eval", "accuracy per question category");
    evl->add_option("--ckpt", ckpt, "model checkpoint");
    evl->add_option("--data", data_dir, "dataset directory");
    evl->add_option("--report", eval_report, "report JSON");
    evl->add_option("--ablate", modules, "modules to zero at inference (mie,rhy,src,rois)");
    add_common(evl);
    auto* imp = app.add_subcommand("importance", "mean module attention per question category");
    imp->add_option("--ckpt", ckpt, "model checkpoint");
    imp->add_option("--data", data_dir, "dataset directory");
    imp->add_option("--out", imp_out, "importance JSON");
    add_common(imp);

    // ablate
    std::string test_dir = "synth_test", abl_report = "ablation.json";
    auto* abl = app.add_subcommand("ablate", "retrain without the given modules and evaluate");
    abl->add_option("--data", data_dir, "training dataset directory");
    abl->add_option("--test", test_dir, "evaluation dataset directory");
    abl->add_option("--rs", rs_in, "encoder checkpoint from pretrain");
    abl->add_option("--modules", modules, "modules to remove (mie,rhy,src,rois)")->required();
    abl->add_option("--report", abl_report, "ablation row JSON");
    add_common(abl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        if (e.get_exit_code() != 0) std::cerr << app.help();
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            Run run("gen-data", common);
            auto& cfg = run.cfg();
            synth::DatasetConfig dc;
            dc.clips = gen_n.value_or(cfg.data.clips);
            dc.seed = cfg.data.seed;
            dc.per_category = gen_per.value_or(cfg.data.per_category);
            if (dc.clips == 0) throw pipeline::ConfigError("--n: must be at least 1");
            const auto catalog = run.catalog();
            const auto out = run.output(gen_out);
            run.stage("gen-data", [&] {
                auto ds = synth::generate_dataset(dc, catalog);
                synth::write_dataset(ds, catalog, out);
                spdlog::info("wrote {} clips and {} questions to {}", ds.specs.size(), ds.samples.size(), out.string());
            });
            run.finish();
        } else if (arh->parsed()) {
            Run run("annotate-rhythm", common);
            auto rc = run.cfg().rhythm;
            if (ann_seg) rc.segment_seconds = *ann_seg;
            const auto in = run.input("--in", ann_in);
            const auto out = run.output(ann_out);
            run.stage("annotate-rhythm", [&] { write_json(out, annotate::to_json(annotate::rhythm_labels(audio::read_wav(in), rc))); });
            run.finish();
        } else if (asrc->parsed()) {
            Run run("annotate-source", common);
            annotate::SourceConfig sc{run.cfg().rhythm.segment_seconds, run.cfg().presence_threshold};
            if (ann_seg) sc.segment_seconds = *ann_seg;
            const auto classes = run.input("--classes", ann_classes.empty() ? run.cfg().data.classes.string() : ann_classes);
            const auto in = run.input("--in", ann_in);
            const auto out = run.output(ann_out);
            run.stage("annotate-source", [&] {
                const annotate::StubBandSeparator sep(annotate::load_bands(classes));
                write_json(out, annotate::to_json(annotate::source_timeline(audio::read_wav(in), sep, sc)));
            });
            run.finish();
        } else if (pre->parsed()) {
            Run run("pretrain", common);
            auto& cfg = run.cfg();
            if (pre_epochs) cfg.pretrain.epochs = *pre_epochs;
            if (pre_lr) cfg.pretrain.lr = *pre_lr;
            auto data = load_data(run, data_dir);
            const auto out = run.output(rs_out), rep = run.output(report);
            run.stage("pretrain", [&] {
                model::QAModel m(pipeline::model_config(cfg, data.ds, data.catalog), cfg.seed);
                auto caches = pipeline::make_caches(m, pipeline::extract_all(data.ds, data.catalog, cfg));
                const auto losses = pipeline::pretrain_encoders(m, caches, data.ds, data.catalog, cfg);
                Checkpoint ck;
                pipeline::save_encoders(m, ck);
                save_checkpoint(ck, out);
                write_json(rep, {{"steps", losses.size()},
                                 {"first_loss", losses.front()},
                                 {"last_loss", losses.back()},
                                 {"losses", losses}});
            });
            run.finish();
        } else if (trn->parsed()) {
            Run run("train", common);
            auto& cfg = run.cfg();
            const auto ablation = model::parse_ablation(modules);
            auto data = load_data(run, data_dir);
            const auto rs_path = run.input("--rs", rs_in);
            const auto out = run.output(model_out), rep = run.output(train_report);
            run.stage("train", [&] {
                model::QAModel m(pipeline::model_config(cfg, data.ds, data.catalog), cfg.seed);
                pipeline::load_encoders(m, Checkpoint::load(rs_path));
                auto caches = pipeline::make_caches(m, pipeline::extract_all(data.ds, data.catalog, cfg));
                OptimState opt;
                const auto records = model::finetune(m, caches, data.ds.samples, cfg.train, opt, ablation,
                                                     [](const model::EpochRecord& r) {
                                                         spdlog::info("epoch {} lr {:.6g} loss {:.4f}", r.epoch, r.lr, r.loss);
                                                     });
                Checkpoint ck;
                model::save_model(m, ck);
                save_checkpoint(ck, out);
                write_json(rep, {{"ablation", ablation.label()}, {"epochs", pipeline::epochs_json(records)}});
            });
            run.finish();
        } else if (evl->parsed() || imp->parsed()) {
            const bool is_eval = evl->parsed();
            Run run(is_eval ? "eval" : "importance", common);
            auto& cfg = run.cfg();
            const auto ablation = model::parse_ablation(modules);
            auto data = load_data(run, data_dir);
            const auto ck_path = run.input("--ckpt", ckpt);
            const auto out = run.output(is_eval ? eval_report : imp_out);
            run.stage(is_eval ? "eval" : "importance", [&] {
                const auto m = model::load_model(Checkpoint::load(ck_path));
                const auto caches = pipeline::make_caches(*m, pipeline::extract_all(data.ds, data.catalog, cfg));
                const auto r = model::evaluate(*m, caches, data.ds.samples, ablation);
                if (is_eval) {
                    auto j = model::to_json(r);
                    j["ablation"] = ablation.label();
                    write_json(out, j);
                    spdlog::info("accuracy {:.4f} over {} questions", r.accuracy(), r.total);
                } else {
                    write_json(out, model::importance_json(r));
                }
            });
            run.finish();
        } else if (abl->parsed()) {
            Run run("ablate", common);
            auto& cfg = run.cfg();
            const auto ablation = model::parse_ablation(modules);
            auto train = load_data(run, data_dir);
            auto test = synth::load_dataset(run.input("--test", test_dir));
            const auto rs_path = run.input("--rs", rs_in);
            const auto out = run.output(abl_report);
            run.stage("ablate", [&] {
                model::QAModel m(pipeline::model_config(cfg, train.ds, train.catalog), cfg.seed);
                pipeline::load_encoders(m, Checkpoint::load(rs_path));
                auto caches = pipeline::make_caches(m, pipeline::extract_all(train.ds, train.catalog, cfg));
                OptimState opt;
                model::finetune(m, caches, train.ds.samples, cfg.train, opt, ablation);
                const auto tcaches = pipeline::make_caches(m, pipeline::extract_all(test, train.catalog, cfg));
                const auto r = model::evaluate(m, tcaches, test.samples, ablation);
                auto j = model::to_json(r);
                j["ablation"] = ablation.label();
                write_json(out, j);
                spdlog::info("without {}: accuracy {:.4f}", ablation.label(), r.accuracy());
            });
            run.finish();
        }
    } catch (const pipeline::ConfigError& e) {
        spdlog::error("invalid configuration: {}", e.what());
        std::cerr << app.get_subcommands().front()->help();
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // bad flag values (unknown module names and the like)
        spdlog::error("invalid argument: {}", e.what());
        std::cerr << app.get_subcommands().front()->help();
        return kExitUsage;
    } catch (const StageError& e) {
        spdlog::error("stage '{}' failed: {}", e.stage, e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        spdlog::error("failed: {}", e.what());
        return kExitRuntime;
    }
    return 0;
}
