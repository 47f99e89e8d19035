#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "scin/checkpoint.hpp"
#include "scin/data.hpp"
#include "scin/hash.hpp"
#include "scin/image_io.hpp"
#include "scin/logging.hpp"
#include "scin/synthetic.hpp"
#include "scin/training.hpp"

namespace scin::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t default_seed = 42;

// One run per output directory.
class OutputLock {
public:
    explicit OutputLock(const fs::path& dir) : path_(dir / ".scin.lock") {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) fail(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f) fail(ErrorKind::io, "output directory " + dir.string() + " is locked or not writable");
        std::fclose(f);
    }
    ~OutputLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path path_;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + p.string() + " for writing");
    out << text;
    if (!out) fail(ErrorKind::io, "failed writing " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string file_hash(const fs::path& p) {
    const std::string bytes = read_file(p);
    Fnv1a64 h;
    h.update(bytes);
    return hex64(h.digest());
}

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    json resolved_config;
    json inputs = json::array();
    std::vector<std::string> outputs;

    void add_input(const std::string& path) {
        std::string hash;
        try {
            hash = file_hash(path);
        } catch (const Error&) {
            hash = "unreadable";
        }
        inputs.push_back({{"path", path}, {"fnv1a64", hash}});
    }

    void write(const fs::path& dir) const {
        json j{{"command", command},
               {"tool_version", SCIN_VERSION},
               {"seed", seed},
               {"resolved_config", resolved_config},
               {"inputs", inputs},
               {"outputs", outputs}};
        write_json(dir / "run_manifest.json", j);
    }
};

// Defaults < config file < command-line flags.
struct ResolvedConfig {
    ArchitectureConfig arch;
    TrainConfig train;
};

struct TrainFlags {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::optional<std::size_t> epochs;
    std::optional<double> learning_rate;
    std::optional<std::size_t> batch_size;
    std::optional<double> momentum;
    std::optional<double> dropout_keep;
    std::optional<std::string> activation;
};

ResolvedConfig resolve_config(const TrainFlags& f, LabelMode mode) {
    ResolvedConfig rc;
    rc.train.seed = default_seed;
    if (!f.config.empty()) {
        json j;
        try {
            j = json::parse(read_file(f.config));
        } catch (const json::exception& e) {
            fail(ErrorKind::config, "config file " + f.config + " is not valid JSON: " + e.what());
        }
        rc.arch = architecture_from_json(j, rc.arch);
        rc.train = train_config_from_json(j, rc.train);
        if (j.contains("architecture")) rc.arch = architecture_from_json(j.at("architecture"), rc.arch);
        if (j.contains("training")) rc.train = train_config_from_json(j.at("training"), rc.train);
    }
    if (f.seed) rc.train.seed = *f.seed;
    if (f.epochs) rc.train.epochs = *f.epochs;
    if (f.learning_rate) rc.train.learning_rate = *f.learning_rate;
    if (f.batch_size) rc.train.batch_size = *f.batch_size;
    if (f.momentum) rc.train.momentum = *f.momentum;
    if (f.dropout_keep) rc.arch.dropout_keep = *f.dropout_keep;
    if (f.activation) rc.arch.activation.kind = activation_from_string(*f.activation);
    rc.arch.num_classes = num_classes(mode);
    rc.arch.validate();
    rc.train.validate();
    return rc;
}

json resolved_json(const ResolvedConfig& rc) {
    return {{"architecture", to_json(rc.arch)}, {"training", to_json(rc.train)}};
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--config", f.config, "JSON config mirroring architecture/training fields");
    cmd->add_option("--epochs", f.epochs, "Training epochs");
    cmd->add_option("--lr", f.learning_rate, "Initial learning rate");
    cmd->add_option("--batch-size", f.batch_size, "Mini-batch size");
    cmd->add_option("--momentum", f.momentum, "SGD momentum");
    cmd->add_option("--dropout", f.dropout_keep, "Dropout keep probability");
    cmd->add_option("--activation", f.activation, "relu or leaky_relu");
}

json fold_assignment_json(const FoldAssignment& a) {
    auto rows = json::array();
    for (std::size_t i = 0; i < a.image_ids.size(); ++i) rows.push_back({{"image_id", a.image_ids[i]}, {"fold", a.fold_of[i]}});
    return {{"folds", a.folds}, {"hash", a.hash()}, {"assignments", rows}};
}

std::string fold_file_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fold_%02zu.ckpt", k);
    return buf;
}

std::string variant_dir(std::string name) {
    std::replace(name.begin(), name.end(), '=', '_');
    return name;
}

// ------------------------------------------------------------------ synth

struct SynthFlags {
    std::uint64_t seed = default_seed;
    std::string out;
    std::size_t classes = 5;
    std::size_t per_class = 100;
    double sigma_f = 0.05;
    double sigma_r = 0.01;
    std::size_t size = 64;
    bool correlated = false;
    double delta = 0.01;
    std::string format = "png";
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
    SyntheticOptions opts;
    opts.num_classes = f.classes;
    opts.sigma_f = f.sigma_f;
    opts.sigma_r = f.sigma_r;
    opts.correlated = f.correlated;
    opts.delta_std = f.delta;
    opts.height = opts.width = f.size;
    validate(opts);
    if (f.per_class < 1) fail(ErrorKind::invalid_parameter, "--per-class must be >= 1");
    if (f.format != "png" && f.format != "ppm") fail(ErrorKind::invalid_parameter, "--format must be png or ppm");

    const fs::path dir(f.out);
    OutputLock lock(dir);
    std::error_code ec;
    fs::create_directories(dir / "images", ec);
    if (ec) fail(ErrorKind::io, "cannot create " + (dir / "images").string());

    Rng rng(f.seed);
    const auto specs = make_camera_specs(opts, rng);
    const auto records = generate_synthetic(specs, f.per_class, rng, opts);

    std::vector<ManifestRow> rows;
    RunManifest manifest{"synth", f.seed, {}, json::array(), {}};
    for (const auto& r : records) {
        std::string name = r.image_id;
        if (f.format == "ppm") name = name.substr(0, name.size() - 4) + ".ppm";
        const std::string rel = "images/" + name;
        if (f.format == "png") {
            write_png(dir / rel, r.pixels);
        } else {
            write_ppm(dir / rel, r.pixels);
        }
        rows.push_back({rel, r.device, r.sensor});
    }
    write_manifest(dir / "manifest.csv", rows);

    json cameras = json::array();
    for (const auto& s : specs) cameras.push_back(to_json(s));
    json sidecar{{"master_seed", f.seed}, {"images_per_class", f.per_class}, {"options", to_json(opts)},
                 {"cameras", cameras}};
    write_json(dir / "synthetic_spec.json", sidecar);

    manifest.resolved_config = {{"synthetic", to_json(opts)}, {"images_per_class", f.per_class}, {"format", f.format}};
    manifest.outputs = {"manifest.csv", "synthetic_spec.json", "images/"};
    manifest.write(dir);
    out << "wrote " << records.size() << " images to " << dir.string() << "\n";
    return 0;
}

// ------------------------------------------------------------------ train

struct DataFlags {
    std::string manifest;
    std::string mode;
    std::string out;
    std::size_t folds = 10;
    bool allow_jpeg = false;
};

int cmd_train(const DataFlags& d, const TrainFlags& f, std::ostream& out) {
    const LabelMode mode = label_mode_from_string(d.mode);
    const ResolvedConfig rc = resolve_config(f, mode);
    const auto records = load_manifest(d.manifest, d.allow_jpeg);

    const fs::path dir(d.out);
    OutputLock lock(dir);
    RunManifest manifest{"train", rc.train.seed, resolved_json(rc), json::array(), {}};
    manifest.resolved_config["mode"] = std::string(to_string(mode));
    manifest.resolved_config["folds"] = d.folds;
    manifest.add_input(d.manifest);

    CrossValidationOptions opts;
    opts.folds = d.folds;
    opts.on_fold = [&](std::size_t k, const Network& net, const FoldResult& r) {
        save_checkpoint(net, dir / fold_file_name(k));
        manifest.outputs.push_back(fold_file_name(k));
        out << "fold " << k << ": accuracy " << r.accuracy << "\n";
    };
    const ExperimentReport report = cross_validate(records, mode, rc.arch, rc.train, opts);

    Rng split_rng(rc.train.seed);
    write_json(dir / "folds.json", fold_assignment_json(split_by_image(records, d.folds, split_rng)));
    write_json(dir / "report.json", to_json(report));
    write_text(dir / "confusion_matrix.csv", report.confusion.to_csv(report.class_names));
    write_json(dir / "timings.json", {{"wall_clock_seconds", report.wall_clock_seconds}});
    for (const char* name : {"folds.json", "report.json", "confusion_matrix.csv", "timings.json"}) {
        manifest.outputs.emplace_back(name);
    }
    manifest.write(dir);
    out << "mean accuracy " << report.mean_accuracy << " over " << d.folds << " folds\n";
    return 0;
}

// ------------------------------------------------------------------- eval

struct EvalFlags {
    std::string checkpoint;
    std::string manifest;
    std::string mode;
    std::string out;
    std::string folds_file;
    std::optional<std::size_t> fold;
    std::string vote = "patch";
    bool allow_jpeg = false;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
    const LabelMode mode = label_mode_from_string(f.mode);
    if (f.vote != "patch" && f.vote != "image") fail(ErrorKind::config, "--vote must be patch or image");
    if (f.fold && f.folds_file.empty()) fail(ErrorKind::config, "--fold requires --folds-file");

    const Network net = load_checkpoint(f.checkpoint);
    if (net.num_classes() != num_classes(mode)) {
        fail(ErrorKind::config, "class-count mismatch: checkpoint has " + std::to_string(net.num_classes()) +
                                    " classes, " + std::string(to_string(mode)) + "-level manifest needs " +
                                    std::to_string(num_classes(mode)));
    }
    const auto records = load_manifest(f.manifest, f.allow_jpeg);

    std::vector<std::size_t> selected;
    if (f.fold) {
        json folds;
        try {
            folds = json::parse(read_file(f.folds_file));
        } catch (const json::exception& e) {
            fail(ErrorKind::config, "folds file " + f.folds_file + " is not valid JSON: " + e.what());
        }
        std::set<std::string> ids;
        for (const auto& row : folds.at("assignments")) {
            if (row.at("fold").get<std::size_t>() == *f.fold) ids.insert(row.at("image_id").get<std::string>());
        }
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (ids.count(records[i].image_id)) selected.push_back(i);
        }
    } else {
        for (std::size_t i = 0; i < records.size(); ++i) selected.push_back(i);
    }
    PatchDataset ds = make_dataset(records, selected, mode);
    ds = normalize(std::move(ds), ChannelStats{std::vector<double>(net.input_mean().begin(), net.input_mean().end())});
    const Evaluation ev = evaluate(net, ds);

    json j{{"checkpoint", f.checkpoint},
           {"mode", std::string(to_string(mode))},
           {"class_names", ds.class_names},
           {"images", selected.size()},
           {"patches", ds.size()},
           {"accuracy", ev.accuracy},
           {"confusion_matrix", ev.confusion.to_json()}};
    if (f.fold) j["fold"] = *f.fold;
    auto per_class = json::array();
    for (std::size_t c = 0; c < ev.confusion.classes(); ++c) {
        const double p = ev.confusion.precision(c), r = ev.confusion.recall(c);
        per_class.push_back({{"class", ds.class_names[c]},
                             {"precision", std::isfinite(p) ? json(p) : json(nullptr)},
                             {"recall", std::isfinite(r) ? json(r) : json(nullptr)}});
    }
    j["per_class"] = per_class;
    if (f.vote == "image") j["image_majority_vote_accuracy"] = ev.image_vote_accuracy;

    if (f.out.empty()) {
        out << j.dump(2) << "\n";
        return 0;
    }
    const fs::path dir(f.out);
    OutputLock lock(dir);
    write_json(dir / "eval.json", j);
    write_text(dir / "confusion_matrix.csv", ev.confusion.to_csv(ds.class_names));
    RunManifest manifest{"eval", 0, {{"mode", std::string(to_string(mode))}, {"vote", f.vote}}, json::array(),
                         {"eval.json", "confusion_matrix.csv"}};
    if (f.fold) manifest.resolved_config["fold"] = *f.fold;
    manifest.resolved_config["architecture"] = to_json(net.config());
    manifest.add_input(f.checkpoint);
    manifest.add_input(f.manifest);
    if (!f.folds_file.empty()) manifest.add_input(f.folds_file);
    manifest.write(dir);
    out << "accuracy " << ev.accuracy << " on " << ds.size() << " patches\n";
    return 0;
}

// ----------------------------------------------------------------- ablate

int cmd_ablate(const DataFlags& d, const TrainFlags& f, const std::string& sweep_name, std::ostream& out) {
    const LabelMode mode = label_mode_from_string(d.mode);
    const SweepKind sweep = sweep_from_string(sweep_name);
    const ResolvedConfig rc = resolve_config(f, mode);
    const auto records = load_manifest(d.manifest, d.allow_jpeg);

    const fs::path dir(d.out);
    OutputLock lock(dir);
    RunManifest manifest{"ablate", rc.train.seed, resolved_json(rc), json::array(), {}};
    manifest.resolved_config["mode"] = std::string(to_string(mode));
    manifest.resolved_config["folds"] = d.folds;
    manifest.resolved_config["sweep"] = std::string(to_string(sweep));
    manifest.add_input(d.manifest);

    CrossValidationOptions opts;
    opts.folds = d.folds;
    const auto variants = run_ablation(sweep, records, mode, rc.arch, rc.train, opts);
    double seconds = 0.0;
    for (const auto& v : variants) {
        if (!v.report) continue;
        const fs::path vdir = dir / variant_dir(v.name);
        std::error_code ec;
        fs::create_directories(vdir, ec);
        if (ec) fail(ErrorKind::io, "cannot create " + vdir.string());
        write_json(vdir / "report.json", to_json(*v.report));
        write_text(vdir / "confusion_matrix.csv", v.report->confusion.to_csv(v.report->class_names));
        manifest.outputs.push_back(variant_dir(v.name) + "/report.json");
        manifest.outputs.push_back(variant_dir(v.name) + "/confusion_matrix.csv");
        seconds += v.report->wall_clock_seconds;
    }
    const std::string csv = ablation_summary_csv(variants);
    write_text(dir / "summary.csv", csv);
    write_json(dir / "summary.json", ablation_summary_json(sweep, variants));
    write_json(dir / "timings.json", {{"wall_clock_seconds", seconds}});
    for (const char* name : {"summary.csv", "summary.json", "timings.json"}) manifest.outputs.emplace_back(name);
    manifest.write(dir);
    out << csv;
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Source camera identification CNN: synthesis, training, evaluation and ablations", "scin"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SCIN_VERSION);

    SynthFlags synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic PRNU camera dataset");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Master seed");
    synth_cmd->add_option("--classes", synth.classes, "Number of sensor classes (1-5)");
    synth_cmd->add_option("--per-class", synth.per_class, "Images per class");
    synth_cmd->add_option("--sigma-f", synth.sigma_f, "Fingerprint std");
    synth_cmd->add_option("--sigma-r", synth.sigma_r, "Readout noise std");
    synth_cmd->add_option("--size", synth.size, "Image side in pixels");
    synth_cmd->add_flag("--correlated", synth.correlated, "Sensors of one device share a fingerprint pattern");
    synth_cmd->add_option("--delta", synth.delta, "Per-sensor deviation std in correlated mode");
    synth_cmd->add_option("--format", synth.format, "png or ppm");

    DataFlags train_data;
    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Cross-validated training from a manifest");
    train_cmd->add_option("--manifest", train_data.manifest, "CSV manifest path,device,sensor")->required();
    train_cmd->add_option("--mode", train_data.mode, "model or sensor")->required();
    train_cmd->add_option("--out", train_data.out, "Output directory")->required();
    train_cmd->add_option("--folds", train_data.folds, "Cross-validation folds");
    train_cmd->add_flag("--allow-jpeg", train_data.allow_jpeg, "Accept JPEG inputs (with a warning)");
    add_train_flags(train_cmd, train_flags);

    EvalFlags eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
    eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--manifest", eval.manifest, "CSV manifest")->required();
    eval_cmd->add_option("--mode", eval.mode, "model or sensor")->required();
    eval_cmd->add_option("--out", eval.out, "Output directory (prints JSON when omitted)");
    eval_cmd->add_option("--folds-file", eval.folds_file, "folds.json written by train");
    eval_cmd->add_option("--fold", eval.fold, "Restrict to this fold's test images");
    eval_cmd->add_option("--vote", eval.vote, "patch or image (adds majority-vote accuracy)");
    eval_cmd->add_flag("--allow-jpeg", eval.allow_jpeg, "Accept JPEG inputs (with a warning)");

    DataFlags ablate_data;
    TrainFlags ablate_flags;
    std::string sweep;
    auto* ablate_cmd = app.add_subcommand("ablate", "Topology, activation or dropout sweep");
    ablate_cmd->add_option("--sweep", sweep, "topology, activation or dropout")->required();
    ablate_cmd->add_option("--manifest", ablate_data.manifest, "CSV manifest")->required();
    ablate_cmd->add_option("--mode", ablate_data.mode, "model or sensor")->required();
    ablate_cmd->add_option("--out", ablate_data.out, "Output directory")->required();
    ablate_cmd->add_option("--folds", ablate_data.folds, "Cross-validation folds");
    ablate_cmd->add_flag("--allow-jpeg", ablate_data.allow_jpeg, "Accept JPEG inputs (with a warning)");
    add_train_flags(ablate_cmd, ablate_flags);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << SCIN_VERSION << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth, out);
        if (*train_cmd) return cmd_train(train_data, train_flags, out);
        if (*eval_cmd) return cmd_eval(eval, out);
        if (*ablate_cmd) return cmd_ablate(ablate_data, ablate_flags, sweep, out);
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace scin::cli
