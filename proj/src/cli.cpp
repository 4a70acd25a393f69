#include "copaint/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "copaint/baselines.hpp"
#include "copaint/copaint.hpp"
#include "copaint/datasets.hpp"
#include "copaint/errors.hpp"
#include "copaint/io.hpp"
#include "copaint/metrics.hpp"
#include "copaint/mlp.hpp"

namespace fs = std::filesystem;

namespace copaint {

namespace {

[[noreturn]] void usage_error(const std::string& what) {
    throw std::invalid_argument(what);
}

// Effective settings come from three layers: built-in defaults, the
// --config file, and explicit flags, the later layers overriding the
// earlier. Every recorded lookup lands in `used`, which becomes the run
// manifest; a manifest therefore re-applies cleanly as a config file.
struct SettingPool {
    KeyValueMap file;
    KeyValueMap flags;
    KeyValueMap used;

    bool has(const std::string& key) const {
        return flags.count(key) > 0 || file.count(key) > 0;
    }

    std::string get(const std::string& key, const std::string& fallback,
                    bool record = true) {
        std::string value = fallback;
        if (auto it = file.find(key); it != file.end()) value = it->second;
        if (auto it = flags.find(key); it != flags.end()) value = it->second;
        if (record) used[key] = value;
        return value;
    }

    long long get_int(const std::string& key, long long fallback,
                      bool record = true) {
        std::string raw = get(key, std::to_string(fallback), record);
        try {
            std::size_t n = 0;
            long long v = std::stoll(raw, &n);
            if (n != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            usage_error("setting '" + key + "': expected an integer, got '" +
                        raw + "'");
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback,
                          bool record = true) {
        std::string raw = get(key, std::to_string(fallback), record);
        try {
            std::size_t n = 0;
            std::uint64_t v = std::stoull(raw, &n);
            if (n != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            usage_error("setting '" + key + "': expected an unsigned integer, "
                        "got '" + raw + "'");
        }
    }

    double get_double(const std::string& key, double fallback,
                      bool record = true) {
        std::string raw = get(key, format_double(fallback), record);
        try {
            std::size_t n = 0;
            double v = std::stod(raw, &n);
            if (n != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            usage_error("setting '" + key + "': expected a number, got '" +
                        raw + "'");
        }
    }
};

std::vector<std::string> split_list(const std::string& raw) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(raw);
    while (std::getline(in, part, ','))
        if (!part.empty()) parts.push_back(part);
    return parts;
}

std::optional<bool> parse_projection(const std::string& raw) {
    if (raw == "auto") return std::nullopt;
    if (raw == "on" || raw == "true" || raw == "1") return true;
    if (raw == "off" || raw == "false" || raw == "0") return false;
    usage_error("setting 'final_projection': expected auto/on/off, got '" +
                raw + "'");
}

// ---------------------------------------------------------------------
// Model + schedule resolution

struct ScheduleSpec {
    int base_T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    double sigma_eta = 1.0;
    int T = 250;  // sampling steps; base_T when equal, else a sub-grid
};

ScheduleSpec read_schedule_spec(SettingPool& pool, int default_T) {
    ScheduleSpec spec;
    spec.base_T = static_cast<int>(pool.get_int("base_T", 1000));
    spec.beta_start = pool.get_double("beta_start", 1e-4);
    spec.beta_end = pool.get_double("beta_end", 0.02);
    spec.sigma_eta = pool.get_double("sigma_eta", 1.0);
    spec.T = static_cast<int>(pool.get_int("T", default_T));
    if (spec.T > spec.base_T)
        usage_error("sampling steps T exceed the base schedule length");
    return spec;
}

struct BuiltSchedule {
    NoiseSchedule schedule;
    std::vector<int> source_steps;  // empty when T == base_T
};

BuiltSchedule build_schedule(const ScheduleSpec& spec) {
    BuiltSchedule built;
    NoiseSchedule base = build_linear_schedule(spec.base_T, spec.beta_start,
                                               spec.beta_end, spec.sigma_eta);
    if (spec.T == spec.base_T) {
        built.schedule = std::move(base);
        return built;
    }
    built.source_steps = evenly_spaced_steps(spec.base_T, spec.T);
    if (static_cast<int>(built.source_steps.size()) != spec.T)
        usage_error("cannot place " + std::to_string(spec.T) +
                    " distinct sampling steps on the base schedule");
    built.schedule = subsequence(base, built.source_steps);
    return built;
}

// Owns whatever backs the denoiser: the checkpoint model or the world copy.
struct LoadedModel {
    std::unique_ptr<MlpModel> mlp;
    std::unique_ptr<Denoiser> denoiser;
    std::string identifier;
    std::string content_hash;
};

LoadedModel load_model(const std::string& spec, const NoiseSchedule& schedule,
                       const std::vector<int>& source_steps) {
    LoadedModel loaded;
    loaded.identifier = spec;
    if (spec.rfind("gaussian:", 0) == 0) {
        fs::path path = spec.substr(9);
        loaded.content_hash = hash_hex(fnv1a_file(path));
        std::ifstream in(path);
        if (!in) usage_error("cannot read world file: " + path.string());
        loaded.denoiser = std::make_unique<GaussianDenoiser>(
            load_gaussian_world(in), schedule);
        return loaded;
    }
    loaded.content_hash = hash_hex(fnv1a_file(spec));
    std::ifstream in(spec, std::ios::binary);
    if (!in) usage_error("cannot read checkpoint: " + spec);
    loaded.mlp = std::make_unique<MlpModel>(load_mlp(in));
    if (source_steps.empty() && loaded.mlp->T() != schedule.T())
        usage_error("checkpoint was trained for T=" +
                    std::to_string(loaded.mlp->T()) +
                    ", run requests T=" + std::to_string(schedule.T()));
    if (!source_steps.empty() && loaded.mlp->T() < source_steps.back())
        usage_error("checkpoint step table too short for the base schedule");
    loaded.denoiser =
        std::make_unique<MlpDenoiser>(*loaded.mlp, schedule, source_steps);
    return loaded;
}

// ---------------------------------------------------------------------
// Reference input + masks

struct Reference {
    Eigen::VectorXd x;
    Geometry geometry;
    bool from_image = false;
};

Reference load_reference(const fs::path& path) {
    Reference ref;
    std::ifstream in(path, std::ios::binary);
    if (!in) usage_error("cannot read input file: " + path.string());
    if (path.extension() == ".pgm") {
        PgmImage image = load_pgm(in);
        ref.geometry = {image.height, image.width};
        ref.x = state_from_pgm(image);
        ref.from_image = true;
    } else {
        ref.x = load_vector(in);
        ref.geometry = {1, static_cast<int>(ref.x.size())};
    }
    return ref;
}

RevealOperator resolve_mask(const std::string& spec, const Geometry& geometry,
                            std::uint64_t seed) {
    if (spec.rfind("file:", 0) == 0) {
        fs::path path = spec.substr(5);
        std::ifstream in(path);
        if (!in) usage_error("cannot read mask file: " + path.string());
        std::vector<std::uint8_t> mask = load_mask(in);
        if (static_cast<int>(mask.size()) != geometry.size())
            usage_error("mask length does not match the input dimension");
        return RevealOperator::pixel_mask(std::move(mask));
    }
    return standard_mask(spec, geometry, seed);
}

// ---------------------------------------------------------------------
// Output writing

void write_manifest(const fs::path& dir, const std::string& command,
                    const SettingPool& pool, const KeyValueMap& extra) {
    KeyValueMap manifest = pool.used;
    manifest["command"] = command;
    manifest["tool_version"] = kToolVersion;
    for (const auto& [k, v] : extra) manifest[k] = v;
    std::ostringstream out;
    save_key_values(manifest, out);
    write_text_file(dir / "manifest.txt", out.str());
}

void write_record_csv(const fs::path& path, const RunRecord& record) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(record.entries.size());
    for (const auto& e : record.entries)
        rows.push_back({std::to_string(e.visit_index), std::to_string(e.t),
                        format_double(e.loss_pre), format_double(e.loss_post),
                        format_double(e.residual)});
    std::ostringstream out;
    write_csv(out, {"visit_index", "t", "loss_pre", "loss_post", "residual"},
              rows);
    write_text_file(path, out.str());
}

void write_metrics_csv(const fs::path& path, const MetricReport& report) {
    std::ostringstream out;
    write_csv(out,
              {"constraint_mean_abs", "constraint_max_abs", "coherence_error"},
              {{format_double(report.constraint_mean_abs),
                format_double(report.constraint_max_abs),
                format_double(report.coherence_error)}});
    write_text_file(path, out.str());
}

void write_vector_file(const fs::path& path, const Eigen::VectorXd& x) {
    std::ostringstream out;
    save_vector(x, out);
    write_text_file(path, out.str());
}

fs::path ensure_out_dir(SettingPool& pool) {
    // The output location never enters the manifest: re-running the same
    // manifest into another directory must produce byte-identical files.
    fs::path dir = pool.get("out", "out", false);
    fs::create_directories(dir);
    return dir;
}

// ---------------------------------------------------------------------
// Subcommands

int cmd_train_toy(SettingPool& pool, bool quiet) {
    fs::path out_dir = ensure_out_dir(pool);
    ScheduleSpec sched_spec = read_schedule_spec(pool, 1000);
    if (sched_spec.T != sched_spec.base_T)
        usage_error("train-toy trains on the full base schedule; leave T "
                    "unset or equal to base_T");
    NoiseSchedule schedule = build_schedule(sched_spec).schedule;

    std::string dataset_name = pool.get("dataset", "mirror");
    std::uint64_t seed = pool.get_u64("seed", 0);
    int n_samples = static_cast<int>(pool.get_int("n_samples", 256));

    std::vector<Eigen::VectorXd> dataset;
    if (dataset_name == "mirror") {
        int dim = static_cast<int>(pool.get_int("dim", 16));
        dataset = mirror_dataset(n_samples, dim, splitmix64(seed));
    } else if (dataset_name == "gaussian-sample") {
        fs::path world_path = pool.get("world", "");
        if (world_path.empty())
            usage_error("dataset gaussian-sample requires --world");
        std::ifstream in(world_path);
        if (!in) usage_error("cannot read world file: " + world_path.string());
        dataset = gaussian_sample_dataset(load_gaussian_world(in), n_samples,
                                          splitmix64(seed));
    } else if (dataset_name == "image-dir") {
        fs::path dir = pool.get("image_dir", "");
        if (dir.empty()) usage_error("dataset image-dir requires --image-dir");
        dataset = image_dir_dataset(dir);
    } else {
        usage_error("unknown dataset '" + dataset_name + "'");
    }

    TrainConfig config;
    config.seed = seed;
    config.embed_dim = static_cast<int>(pool.get_int("embed_dim", 8));
    config.epochs = static_cast<int>(pool.get_int("epochs", 200));
    config.batch = static_cast<int>(pool.get_int("batch", 32));
    config.lr = pool.get_double("lr", 0.05);
    config.hidden.clear();
    for (const std::string& part : split_list(pool.get("hidden", "64,64")))
        config.hidden.push_back(
            static_cast<int>(std::stoll(part)));

    TrainResult result = train_mlp(dataset, schedule, config);

    {
        std::ostringstream out;
        save_mlp(result.model, out);
        write_text_file(out_dir / "model.cpmlp", out.str());
    }
    {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t e = 0; e < result.epoch_losses.size(); ++e)
            rows.push_back({std::to_string(e + 1),
                            format_double(result.epoch_losses[e])});
        std::ostringstream out;
        write_csv(out, {"epoch", "loss"}, rows);
        write_text_file(out_dir / "train_log.csv", out.str());
    }
    write_manifest(out_dir, "train-toy", pool, {});

    if (!quiet)
        std::cout << "final_loss = " << format_double(result.final_loss)
                  << "\nbaseline_loss = " << format_double(result.baseline_loss)
                  << "\n";
    return 0;
}

struct PreparedRun {
    ScheduleSpec sched_spec;
    BuiltSchedule built;
    LoadedModel model;
    Reference reference;
    CoPaintConfig config;
    Method method = Method::CopaintTT;
};

CoPaintConfig read_copaint_config(SettingPool& pool, const CoPaintConfig& preset,
                                  const ScheduleSpec& sched_spec) {
    CoPaintConfig config = preset;
    config.T = sched_spec.T;
    config.sigma_eta = sched_spec.sigma_eta;
    config.G = static_cast<int>(pool.get_int("G", preset.G));
    config.eta0 = pool.get_double("eta0", preset.eta0);
    config.xi_decay = pool.get_double("xi_decay", preset.xi_decay);
    config.tau = static_cast<int>(pool.get_int("tau", preset.tau));
    config.K = static_cast<int>(pool.get_int("K", preset.K));
    config.H = static_cast<int>(pool.get_int("H", preset.H));
    config.final_projection =
        parse_projection(pool.get("final_projection", "auto"));
    config.seed = pool.get_u64("seed", 0);
    return config;
}

PreparedRun prepare_run(SettingPool& pool, const std::string& method_raw) {
    PreparedRun run;
    run.method = parse_method(method_raw);
    CoPaintConfig preset = preset_config(run.method, CoPaintConfig{});

    run.sched_spec = read_schedule_spec(pool, preset.T);
    run.built = build_schedule(run.sched_spec);

    std::string model_spec = pool.get("model", "");
    if (model_spec.empty()) usage_error("--model is required");
    run.model =
        load_model(model_spec, run.built.schedule, run.built.source_steps);

    fs::path input = pool.get("input", "");
    if (input.empty()) usage_error("--input is required");
    run.reference = load_reference(input);
    if (run.reference.x.size() != run.model.denoiser->dim())
        usage_error("input dimension " + std::to_string(run.reference.x.size()) +
                    " does not match the model dimension " +
                    std::to_string(run.model.denoiser->dim()));

    run.config = read_copaint_config(pool, preset, run.sched_spec);
    return run;
}

int cmd_inpaint(SettingPool& pool, bool quiet) {
    fs::path out_dir = ensure_out_dir(pool);
    std::string method_raw = pool.get("method", "copaint-tt");
    PreparedRun run = prepare_run(pool, method_raw);

    RevealOperator op = resolve_mask(pool.get("mask", "half"),
                                     run.reference.geometry, run.config.seed);
    Observation obs = observe(op, run.reference.x);

    Rng rng(run.config.seed);
    RunResult result = run_method(run.method, run.built.schedule,
                                  *run.model.denoiser, obs, run.config, rng);

    write_vector_file(out_dir / "output.vec", result.x0);
    if (run.reference.from_image) {
        PgmImage image = pgm_from_state(result.x0, run.reference.geometry);
        std::ostringstream out;
        save_pgm(image, out);
        write_text_file(out_dir / "output.pgm", out.str());
    }
    if (op.kind() == RevealOperator::Kind::PixelMask) {
        std::ostringstream out;
        save_mask(op.mask(), out);
        write_text_file(out_dir / "mask.txt", out.str());
    }
    write_record_csv(out_dir / "record.csv", result.record);
    MetricReport report = make_report(obs, result.x0);
    write_metrics_csv(out_dir / "metrics.csv", report);
    write_manifest(out_dir, "inpaint", pool,
                   {{"model_hash", run.model.content_hash}});

    if (!quiet)
        std::cout << "constraint_mean_abs = "
                  << format_double(report.constraint_mean_abs)
                  << "\ncoherence_error = "
                  << format_double(report.coherence_error) << "\n";
    return 0;
}

int cmd_compare(SettingPool& pool, bool quiet) {
    fs::path out_dir = ensure_out_dir(pool);
    std::vector<std::string> methods = split_list(pool.get("methods", ""));
    std::vector<std::string> masks = split_list(pool.get("masks", "half"));
    if (methods.empty()) usage_error("--methods must list at least one method");
    if (masks.empty()) usage_error("--masks must list at least one mask");
    int n_seeds = static_cast<int>(pool.get_int("n_seeds", 32));
    if (n_seeds < 1) usage_error("--n-seeds must be >= 1");
    std::uint64_t seed = pool.get_u64("seed", 0);

    // metric values[mask][method][metric][seed]
    struct Cell {
        std::vector<double> constraint_mean;
        std::vector<double> coherence;
    };
    std::vector<std::vector<Cell>> cells(
        masks.size(), std::vector<Cell>(methods.size()));

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        // Per-method resolution: presets differ (copaint-fast shortens the
        // schedule), so everything from the schedule down is rebuilt here.
        // Lookups stay out of the manifest; the manifest records only what
        // the user actually set, keeping a re-run method-neutral.
        PreparedRun run = prepare_run(pool, methods[mi]);
        for (std::size_t ki = 0; ki < masks.size(); ++ki) {
            RevealOperator op = resolve_mask(masks[ki], run.reference.geometry,
                                             run.config.seed);
            Observation obs = observe(op, run.reference.x);
            for (int s = 0; s < n_seeds; ++s) {
                Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(s));
                RunResult result =
                    run_method(run.method, run.built.schedule,
                               *run.model.denoiser, obs, run.config, rng);
                MetricReport report = make_report(obs, result.x0);
                cells[ki][mi].constraint_mean.push_back(
                    report.constraint_mean_abs);
                cells[ki][mi].coherence.push_back(report.coherence_error);
            }
        }
    }

    {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t ki = 0; ki < masks.size(); ++ki)
            for (std::size_t mi = 0; mi < methods.size(); ++mi)
                rows.push_back(
                    {methods[mi], masks[ki],
                     format_double(median(cells[ki][mi].constraint_mean)),
                     format_double(median(cells[ki][mi].coherence))});
        std::ostringstream out;
        write_csv(out,
                  {"method", "mask", "median_constraint_mean_abs",
                   "median_coherence_error"},
                  rows);
        write_text_file(out_dir / "compare.csv", out.str());
    }

    {
        auto win_rate = [n_seeds](const std::vector<double>& a,
                                  const std::vector<double>& b) {
            double wins = 0.0;
            for (int s = 0; s < n_seeds; ++s) {
                if (a[s] < b[s]) wins += 1.0;
                else if (a[s] == b[s]) wins += 0.5;
            }
            return wins / n_seeds;
        };
        std::vector<std::vector<std::string>> rows;
        for (std::size_t ki = 0; ki < masks.size(); ++ki)
            for (std::size_t a = 0; a < methods.size(); ++a)
                for (std::size_t b = a; b < methods.size(); ++b) {
                    rows.push_back({masks[ki], "constraint_mean_abs",
                                    methods[a], methods[b],
                                    format_double(win_rate(
                                        cells[ki][a].constraint_mean,
                                        cells[ki][b].constraint_mean))});
                    rows.push_back({masks[ki], "coherence_error", methods[a],
                                    methods[b],
                                    format_double(win_rate(
                                        cells[ki][a].coherence,
                                        cells[ki][b].coherence))});
                }
        std::ostringstream out;
        write_csv(out, {"mask", "metric", "method_a", "method_b", "win_rate_a"},
                  rows);
        write_text_file(out_dir / "wins.csv", out.str());
    }

    KeyValueMap extra;
    extra["methods"] = pool.get("methods", "");
    extra["masks"] = pool.get("masks", "half");
    write_manifest(out_dir, "compare", pool, extra);
    if (!quiet) std::cout << "compared " << methods.size() << " methods on "
                          << masks.size() << " masks\n";
    return 0;
}

PgmImage render_curve(const std::vector<std::pair<int, double>>& curve) {
    const int height = 160;
    const int width = static_cast<int>(curve.size());
    PgmImage image;
    image.height = height;
    image.width = width;
    image.pixels.assign(
        static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 255);
    double top = 0.0;
    for (const auto& [t, g] : curve) top = std::max(top, g);
    int prev_row = height - 1;
    for (int col = 0; col < width; ++col) {
        double g = curve[static_cast<std::size_t>(col)].second;
        int row = height - 1 -
                  static_cast<int>(std::lround(
                      (top > 0.0 ? g / top : 0.0) * (height - 1)));
        int lo = std::min(row, prev_row);
        int hi = std::max(row, prev_row);
        for (int r = lo; r <= hi; ++r)
            image.pixels[static_cast<std::size_t>(r) *
                             static_cast<std::size_t>(width) +
                         static_cast<std::size_t>(col)] = 0;
        prev_row = row;
    }
    return image;
}

int cmd_gap_plot(SettingPool& pool, bool quiet) {
    fs::path out_dir = ensure_out_dir(pool);
    ScheduleSpec sched_spec = read_schedule_spec(pool, 250);
    BuiltSchedule built = build_schedule(sched_spec);

    std::string model_spec = pool.get("model", "");
    if (model_spec.empty()) usage_error("--model is required");
    LoadedModel model =
        load_model(model_spec, built.schedule, built.source_steps);

    int n_runs = static_cast<int>(pool.get_int("n_runs", 32));
    std::uint64_t seed = pool.get_u64("seed", 0);

    Rng rng(seed);
    std::vector<std::pair<int, double>> curve =
        gap_trajectory(built.schedule, *model.denoiser, n_runs, rng);

    {
        std::vector<std::vector<std::string>> rows;
        for (const auto& [t, g] : curve)
            rows.push_back({std::to_string(t), format_double(g)});
        std::ostringstream out;
        write_csv(out, {"t", "gap"}, rows);
        write_text_file(out_dir / "gap.csv", out.str());
    }
    {
        std::ostringstream out;
        save_pgm(render_curve(curve), out);
        write_text_file(out_dir / "gap.pgm", out.str());
    }
    write_manifest(out_dir, "gap-plot", pool,
                   {{"model_hash", model.content_hash}});

    if (!quiet)
        std::cout << "gap(T) = " << format_double(curve.front().second)
                  << ", gap(1) = " << format_double(curve.back().second)
                  << "\n";
    return 0;
}

void add_setting_option(CLI::App* cmd, KeyValueMap& flags,
                        const std::string& flag, const std::string& key,
                        const std::string& desc) {
    cmd->add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags[key] = v; }, desc);
}

void add_common_options(CLI::App* cmd, KeyValueMap& flags,
                        std::string& config_path, bool& quiet) {
    cmd->add_option("--config", config_path,
                    "key = value settings file (flags override it)");
    cmd->add_flag("--quiet", quiet, "suppress progress output");
    add_setting_option(cmd, flags, "--seed", "seed", "RNG seed (u64)");
    add_setting_option(cmd, flags, "--out", "out", "output directory");
    add_setting_option(cmd, flags, "--base-T", "base_T",
                       "base schedule length");
    add_setting_option(cmd, flags, "--beta-start", "beta_start",
                       "first beta of the linear ramp");
    add_setting_option(cmd, flags, "--beta-end", "beta_end",
                       "last beta of the linear ramp");
    add_setting_option(cmd, flags, "--sigma-eta", "sigma_eta",
                       "reverse-noise scale in [0,1]");
}

void add_run_options(CLI::App* cmd, KeyValueMap& flags) {
    add_setting_option(cmd, flags, "--model", "model",
                       "checkpoint path or gaussian:<world file>");
    add_setting_option(cmd, flags, "--input", "input",
                       "reference vector (.vec text) or image (.pgm)");
    add_setting_option(cmd, flags, "-T,--steps", "T", "sampling steps");
    add_setting_option(cmd, flags, "-G,--grad-steps", "G",
                       "gradient steps per visit");
    add_setting_option(cmd, flags, "--eta0", "eta0", "learning-rate scale");
    add_setting_option(cmd, flags, "--xi-decay", "xi_decay",
                       "constraint-weight decay base");
    add_setting_option(cmd, flags, "--tau", "tau", "rewind window length");
    add_setting_option(cmd, flags, "-K,--rewinds", "K", "rewinds per window");
    add_setting_option(cmd, flags, "-H,--substeps", "H",
                       "clean-estimate substeps");
    add_setting_option(cmd, flags, "--final-projection", "final_projection",
                       "auto|on|off");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"diffusion inpainting lab"};
    app.require_subcommand(1);

    KeyValueMap flags;
    std::string config_path;
    bool quiet = false;
    app.add_option("--config", config_path,
                   "key = value settings file (flags override it)");
    app.add_flag("--quiet", quiet, "suppress progress output");

    CLI::App* train = app.add_subcommand("train-toy",
                                         "train the toy noise predictor");
    add_common_options(train, flags, config_path, quiet);
    add_setting_option(train, flags, "--dataset", "dataset",
                       "mirror | gaussian-sample | image-dir");
    add_setting_option(train, flags, "--dim", "dim", "mirror state dimension");
    add_setting_option(train, flags, "--n-samples", "n_samples",
                       "training vectors to generate");
    add_setting_option(train, flags, "--world", "world",
                       "world file for gaussian-sample");
    add_setting_option(train, flags, "--image-dir", "image_dir",
                       "directory of .pgm training images");
    add_setting_option(train, flags, "--hidden", "hidden",
                       "hidden widths, comma separated");
    add_setting_option(train, flags, "--embed-dim", "embed_dim",
                       "time-embedding width");
    add_setting_option(train, flags, "--epochs", "epochs", "training epochs");
    add_setting_option(train, flags, "--batch", "batch", "minibatch size");
    add_setting_option(train, flags, "--lr", "lr", "training step size");
    add_setting_option(train, flags, "-T,--steps", "T",
                       "must equal base-T for training");

    CLI::App* inpaint = app.add_subcommand("inpaint", "run one inpainting job");
    add_common_options(inpaint, flags, config_path, quiet);
    add_run_options(inpaint, flags);
    add_setting_option(inpaint, flags, "--method", "method",
                       "copaint | copaint-tt | copaint-fast | blended | ddnm "
                       "| repaint-lite");
    add_setting_option(inpaint, flags, "--mask", "mask",
                       "mask name or file:<path>");

    CLI::App* compare = app.add_subcommand("compare",
                                           "paired-seed method comparison");
    add_common_options(compare, flags, config_path, quiet);
    add_run_options(compare, flags);
    add_setting_option(compare, flags, "--methods", "methods",
                       "comma-separated method list");
    add_setting_option(compare, flags, "--masks", "masks",
                       "comma-separated mask list");
    add_setting_option(compare, flags, "--n-seeds", "n_seeds",
                       "paired seeds per cell");

    CLI::App* gap = app.add_subcommand("gap-plot",
                                       "one-step approximation gap curve");
    add_common_options(gap, flags, config_path, quiet);
    add_setting_option(gap, flags, "--model", "model",
                       "checkpoint path or gaussian:<world file>");
    add_setting_option(gap, flags, "-T,--steps", "T", "sampling steps");
    add_setting_option(gap, flags, "--n-runs", "n_runs",
                       "unconditional trajectories to average");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        SettingPool pool;
        pool.flags = flags;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) usage_error("cannot read config file: " + config_path);
            pool.file = load_key_values(in);
        }
        if (app.got_subcommand("train-toy")) return cmd_train_toy(pool, quiet);
        if (app.got_subcommand("inpaint")) return cmd_inpaint(pool, quiet);
        if (app.got_subcommand("compare")) return cmd_compare(pool, quiet);
        if (app.got_subcommand("gap-plot")) return cmd_gap_plot(pool, quiet);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace copaint
