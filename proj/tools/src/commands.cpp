#include "commands.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "parallel.hpp"
#include "prunedoc/classifier.hpp"
#include "prunedoc/costmodel.hpp"
#include "prunedoc/errors.hpp"
#include "prunedoc/image_io.hpp"
#include "prunedoc/labeler.hpp"
#include "prunedoc/maskops.hpp"
#include "prunedoc/oracle.hpp"
#include "prunedoc/pruner.hpp"
#include "prunedoc/rng.hpp"
#include "prunedoc/synthdoc.hpp"
#include "prunedoc_cli/cli.hpp"
#include "run_manifest.hpp"

namespace prunedoc::cli {

namespace fs = std::filesystem;

namespace {

std::string slurp_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << text;
}

fs::path sidecar(const fs::path& path, const char* suffix) { return fs::path(path.string() + suffix); }

Json parse_json_file(const fs::path& path) {
    try {
        return Json::parse(slurp_text(path));
    } catch (const Json::parse_error& e) {
        throw MalformedInputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

// -- corpus ---------------------------------------------------------------------

struct CorpusEntry {
    fs::path image;
    fs::path annotation;
};

std::vector<CorpusEntry> discover_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("corpus directory '" + dir.string() + "' does not exist");
    }
    std::vector<CorpusEntry> entries;
    const fs::path manifest = dir / "corpus.json";
    if (fs::exists(manifest)) {
        const Json doc = parse_json_file(manifest);
        if (!doc.contains("documents") || !doc["documents"].is_array()) {
            throw MalformedInputError("corpus manifest lacks a 'documents' array");
        }
        for (const auto& d : doc["documents"]) {
            entries.push_back({dir / d.at("image").get<std::string>(), dir / d.at("annotation").get<std::string>()});
        }
        return entries;
    }
    // No manifest: pair every image with the annotation sharing its stem.
    for (const auto& item : fs::directory_iterator(dir)) {
        const auto ext = item.path().extension();
        if (ext != ".png" && ext != ".pgm") continue;
        fs::path annotation = item.path();
        annotation.replace_extension(".json");
        if (fs::exists(annotation)) {
            entries.push_back({item.path(), annotation});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const CorpusEntry& a, const CorpusEntry& b) { return a.image < b.image; });
    return entries;
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
    std::vector<std::string> files;
    for (const auto& pattern : patterns) {
        glob_t matches{};
        const int rc = ::glob(pattern.c_str(), 0, nullptr, &matches);
        if (rc == 0) {
            for (std::size_t i = 0; i < matches.gl_pathc; ++i) files.emplace_back(matches.gl_pathv[i]);
        }
        globfree(&matches);
    }
    return files;
}

double round_to(double value, int digits) {
    const double scale = std::pow(10.0, digits);
    return std::round(value * scale) / scale;
}

}  // namespace

// -- synth ------------------------------------------------------------------------

int cmd_synth(const SynthOptions& options, std::ostream& out) {
    SynthSpec spec;
    if (!options.spec_file.empty()) {
        spec = parse_spec(slurp_text(options.spec_file));
    } else {
        const auto mode = parse_synth_mode(options.mode);
        if (!mode) throw ConfigError("--mode must be 'page' or 'receipt'");
        spec = *mode == SynthMode::page ? SynthSpec::page_default() : SynthSpec::receipt_default();
    }
    spec.validate();

    const fs::path dir(options.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'");
    }

    struct Written {
        std::string image;
        std::string annotation;
        std::uint64_t seed = 0;
        std::size_t boxes = 0;
    };
    std::vector<Written> written(options.count);
    parallel_for(options.count, [&](std::size_t i) {
        std::ostringstream stem;
        stem << "doc_" << std::setw(4) << std::setfill('0') << i;
        const std::uint64_t doc_seed = mix_seed(options.seed, i);
        SynthDocument doc = generate(spec, doc_seed);
        doc.annotations.image_id = stem.str() + ".png";
        write_png(doc.image, dir / (stem.str() + ".png"));
        write_annotations(doc.annotations, dir / (stem.str() + ".json"));
        written[i] = {stem.str() + ".png", stem.str() + ".json", doc_seed, doc.annotations.boxes.size()};
    });

    Json corpus;
    corpus["version"] = 1;
    corpus["mode"] = std::string(to_string(spec.mode));
    corpus["seed"] = options.seed;
    corpus["spec"] = Json::parse(format_spec(spec));
    Json documents = Json::array();
    std::size_t total_boxes = 0;
    for (const auto& w : written) {
        documents.push_back({{"image", w.image}, {"annotation", w.annotation}, {"seed", w.seed},
                             {"mode", std::string(to_string(spec.mode))}});
        total_boxes += w.boxes;
    }
    corpus["documents"] = std::move(documents);
    write_text(dir / "corpus.json", corpus.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "synth";
    manifest.options = {{"out", options.out_dir}, {"count", options.count}, {"mode", options.mode},
                        {"seed", options.seed}, {"spec", options.spec_file}};
    manifest.seed = options.seed;
    if (!options.spec_file.empty()) manifest.inputs.push_back(options.spec_file);
    manifest.outputs.push_back((dir / "corpus.json").string());
    for (const auto& w : written) {
        manifest.outputs.push_back((dir / w.image).string());
        manifest.outputs.push_back((dir / w.annotation).string());
    }
    manifest.metrics = {{"documents", options.count}, {"boxes", total_boxes}};
    manifest.write(dir / "synth.run.json");

    out << "synth: wrote " << options.count << " " << to_string(spec.mode) << " documents to " << dir.string()
        << "\n";
    return kExitOk;
}

// -- train ------------------------------------------------------------------------

int cmd_train(const TrainOptions& options, std::ostream& out) {
    if (options.patch_size == 0) throw ConfigError("--patch-size must be at least 1");
    if (options.epochs == 0) throw ConfigError("--epochs must be at least 1");
    if (!(options.holdout > 0.0 && options.holdout < 1.0)) throw ConfigError("--holdout must lie in (0, 1)");

    const auto entries = discover_corpus(options.corpus_dir);
    if (entries.empty()) {
        throw DegenerateDataError("corpus '" + options.corpus_dir + "' has no annotated images");
    }
    std::vector<std::optional<LabeledImage>> loaded(entries.size());
    parallel_for(entries.size(), [&](std::size_t i) {
        loaded[i] = LabeledImage{read_image(entries[i].image), read_annotations(entries[i].annotation)};
    });
    std::vector<LabeledImage> corpus;
    corpus.reserve(loaded.size());
    for (auto& item : loaded) corpus.push_back(std::move(*item));

    const PatchDataset data = build_dataset(corpus, options.patch_size, options.per_class_cap, options.seed);
    corpus.clear();

    // Seeded holdout split.
    Rng split_rng(mix_seed(options.seed, 101));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    split_rng.shuffle(order);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(options.holdout * static_cast<double>(data.size()))));
    if (n_val >= data.size()) {
        throw DegenerateDataError("dataset too small for a holdout split");
    }
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    const PatchDataset train_set = data.subset(train_idx);
    const PatchDataset val_set = data.subset(val_idx);

    TrainConfig cfg;
    cfg.learning_rate = options.learning_rate;
    cfg.batch_size = options.batch_size;
    cfg.epochs = options.epochs;
    cfg.seed = options.seed;
    cfg.hidden_dim = options.hidden_dim;
    const ClassifierModel model = train(train_set, cfg, [&](std::size_t epoch, const ClassifierParams&) {
        out << "train: epoch " << (epoch + 1) << "/" << cfg.epochs << " done\n";
    });
    save_model(model, options.out);

    const ClassifierParams final_params = ClassifierParams::from_model(model);
    std::vector<std::size_t> all_train(train_set.size());
    std::iota(all_train.begin(), all_train.end(), std::size_t{0});
    std::vector<std::size_t> all_val(val_set.size());
    std::iota(all_val.begin(), all_val.end(), std::size_t{0});
    const double train_bce = mean_bce(final_params, train_set, all_train);
    const double val_bce = mean_bce(final_params, val_set, all_val);
    std::vector<double> val_scores(val_set.size());
    for (std::size_t i = 0; i < val_set.size(); ++i) val_scores[i] = forward(model, val_set.pixels(i));
    const double val_ap = val_set.count(1) > 0 ? average_precision(val_scores, val_set.labels()) : 0.0;

    RunManifest manifest;
    manifest.command = "train";
    manifest.options = {{"corpus", options.corpus_dir}, {"patch_size", options.patch_size},
                        {"epochs", options.epochs},      {"seed", options.seed},
                        {"out", options.out},            {"cap", options.per_class_cap},
                        {"hidden", options.hidden_dim},  {"batch_size", options.batch_size},
                        {"lr", options.learning_rate},   {"holdout", options.holdout}};
    manifest.seed = options.seed;
    for (const auto& e : entries) manifest.inputs.push_back(e.image.string());
    manifest.outputs.push_back(options.out);
    manifest.metrics = {{"train_bce", train_bce},         {"val_bce", val_bce},
                        {"val_ap", val_ap},               {"train_patches", train_set.size()},
                        {"val_patches", val_set.size()},  {"text_patches", data.count(1)},
                        {"background_patches", data.count(0)}, {"params", param_count(options.patch_size, options.hidden_dim)}};
    manifest.write(sidecar(options.out, ".run.json"));

    out << std::fixed << std::setprecision(4) << "train: train BCE " << train_bce << ", val BCE " << val_bce
        << ", val AP " << val_ap << " (" << train_set.size() << " train / " << val_set.size()
        << " val patches)\n";
    return kExitOk;
}

// -- prune ------------------------------------------------------------------------

int cmd_prune(const PruneOptions& options, std::ostream& out) {
    const auto strategy = parse_strategy(options.strategy);
    if (!strategy) {
        throw ConfigError("--strategy must be preserved, ordered, random or constant");
    }
    const ClassifierModel model = load_model(options.model);
    const GrayImage image = read_image(options.image);
    const PatchGrid grid = extract_grid(image, model.patch_size);
    const BinaryMask raw = threshold_logits(classify_grid(model, grid));
    const BinaryMask mask = dilate(raw, options.pool);
    PrunedTokenSet set = prune(grid, mask);
    if (*strategy != IndexStrategy::preserved) {
        set = reindex(set, *strategy, options.seed);
    }
    const TokenFiles files = write_tokens(set, options.out_stem);
    if (!options.mask_out.empty()) {
        write_mask(mask, options.mask_out);
    }

    const double reduction = token_reduction(set);
    RunManifest manifest;
    manifest.command = "prune";
    manifest.options = {{"model", options.model}, {"image", options.image},       {"pool", options.pool},
                        {"strategy", options.strategy}, {"seed", options.seed}, {"out", options.out_stem}};
    manifest.seed = options.seed;
    manifest.inputs = {options.model, options.image};
    manifest.outputs = {files.manifest.string(), files.blob.string()};
    if (!options.mask_out.empty()) manifest.outputs.push_back(options.mask_out);
    manifest.metrics = {{"L", set.size()},
                        {"grid_rows", set.grid_rows},
                        {"grid_cols", set.grid_cols},
                        {"raw_retained", raw.count_ones()},
                        {"token_reduction", reduction},
                        {"fully_pruned", set.empty()}};
    manifest.write(sidecar(options.out_stem, ".run.json"));

    out << "prune: kept " << set.size() << " of " << set.grid_size() << " patches (" << std::fixed
        << std::setprecision(2) << reduction << "% reduction) -> " << files.manifest.string() << "\n";
    if (set.empty()) {
        out << "prune: image is fully pruned\n";
        return kExitFullyPruned;
    }
    return kExitOk;
}

// -- stats ------------------------------------------------------------------------

int cmd_stats(const StatsOptions& options, std::ostream& out) {
    const PipelineProfile profile = resolve_profile(options.profile);
    const auto files = expand_globs(options.token_globs);
    if (files.empty()) {
        throw IoError("no token files match the given --tokens pattern(s)");
    }

    struct FileStats {
        std::size_t retained = 0;
        std::size_t total = 0;
        ReductionReport report;
    };
    std::vector<FileStats> stats(files.size());
    parallel_for(files.size(), [&](std::size_t i) {
        const PrunedTokenSet set = read_tokens(files[i]);
        stats[i].retained = set.size();
        stats[i].total = set.grid_size();
        stats[i].report = reduction_report(profile, set.grid_size(), set.size());
    });

    Json per_file = Json::array();
    Json fully_pruned = Json::array();
    double token_sum = 0.0;
    double flops_sum = 0.0;
    std::size_t flops_files = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& s = stats[i];
        const bool empty = s.retained == 0;
        Json entry = {{"file", files[i]},
                      {"L", s.retained},
                      {"total", s.total},
                      {"token_reduction", s.report.token_reduction},
                      {"fully_pruned", empty}};
        token_sum += s.report.token_reduction;
        if (empty) {
            entry["flops_reduction"] = nullptr;
            fully_pruned.push_back({{"file", files[i]}, {"score", 0}});
        } else {
            entry["flops_reduction"] = s.report.flops_reduction;
            flops_sum += s.report.flops_reduction;
            ++flops_files;
        }
        per_file.push_back(std::move(entry));
    }

    Json report;
    report["profile"] = Json::parse(format_profile(profile));
    report["files"] = std::move(per_file);
    report["fully_pruned"] = std::move(fully_pruned);
    report["n_files"] = files.size();
    report["n_flops_files"] = flops_files;
    report["mean_token_reduction"] = token_sum / static_cast<double>(files.size());
    if (flops_files > 0) {
        report["mean_flops_reduction"] = flops_sum / static_cast<double>(flops_files);
    } else {
        report["mean_flops_reduction"] = nullptr;
    }
    write_text(options.out, report.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "stats";
    manifest.options = {{"tokens", options.token_globs}, {"profile", options.profile}, {"out", options.out}};
    manifest.inputs = files;
    manifest.outputs = {options.out};
    manifest.metrics = {{"n_files", files.size()},
                        {"n_fully_pruned", files.size() - flops_files},
                        {"mean_token_reduction", report["mean_token_reduction"]},
                        {"mean_flops_reduction", report["mean_flops_reduction"]}};
    manifest.write(sidecar(options.out, ".run.json"));

    out << "stats: " << files.size() << " files, mean token reduction " << std::fixed << std::setprecision(2)
        << round_to(token_sum / static_cast<double>(files.size()), 2) << "%";
    if (flops_files > 0) {
        out << ", mean FLOPs reduction " << round_to(flops_sum / static_cast<double>(flops_files), 2) << "%";
    }
    out << ", fully pruned " << (files.size() - flops_files) << "\n";
    return kExitOk;
}

// -- overlay ----------------------------------------------------------------------

int cmd_overlay(const OverlayOptions& options, std::ostream& out) {
    const GrayImage image = read_image(options.image);
    const PrunedTokenSet set = read_tokens(options.tokens);
    if (set.image_width != image.width() || set.image_height != image.height()) {
        throw ConfigError("token set was produced from a " + std::to_string(set.image_width) + "x" +
                          std::to_string(set.image_height) + " image, got " + std::to_string(image.width()) +
                          "x" + std::to_string(image.height()));
    }
    const std::size_t p = set.patch_size;
    std::vector<std::uint8_t> retained(set.grid_size(), 0);
    for (const Token& t : set.tokens) retained[t.row * set.grid_cols + t.col] = 1;

    RgbImage overlay{image.width(), image.height(), std::vector<std::uint8_t>(image.width() * image.height() * 3)};
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            const std::size_t r = y / p;
            const std::size_t c = x / p;
            const bool kept = retained[r * set.grid_cols + c] != 0;
            std::uint8_t v = image.at(x, y);
            std::uint8_t rgb[3] = {v, v, v};
            if (!kept) {
                v = static_cast<std::uint8_t>(v / 2);
                rgb[0] = rgb[1] = rgb[2] = v;
            } else if (x % p == 0 || y % p == 0 || x % p == p - 1 || y % p == p - 1) {
                rgb[0] = 255;
                rgb[1] = 0;
                rgb[2] = 0;
            }
            std::copy(rgb, rgb + 3, overlay.data.begin() + static_cast<std::ptrdiff_t>(3 * (y * image.width() + x)));
        }
    }
    write_png(overlay, options.out);

    RunManifest manifest;
    manifest.command = "overlay";
    manifest.options = {{"image", options.image}, {"tokens", options.tokens}, {"out", options.out}};
    manifest.inputs = {options.image, options.tokens};
    manifest.outputs = {options.out};
    manifest.metrics = {{"L", set.size()}, {"grid_size", set.grid_size()}};
    manifest.write(sidecar(options.out, ".run.json"));

    out << "overlay: " << set.size() << " retained patches drawn to " << options.out << "\n";
    return kExitOk;
}

// -- oracle -----------------------------------------------------------------------

int cmd_oracle(const OracleCommandOptions& options, std::ostream& out, std::ostream& err) {
    OracleOptions oracle;
    {
        const auto x = options.grid.find_first_of("xX");
        std::size_t rows = 0;
        std::size_t cols = 0;
        try {
            if (x == std::string::npos) throw std::invalid_argument("no separator");
            std::size_t used = 0;
            rows = std::stoul(options.grid.substr(0, x), &used);
            if (used != x) throw std::invalid_argument("rows");
            cols = std::stoul(options.grid.substr(x + 1), &used);
            if (used != options.grid.size() - x - 1) throw std::invalid_argument("cols");
        } catch (const std::exception&) {
            throw ConfigError("--grid must look like RxC, got '" + options.grid + "'");
        }
        if (rows * cols < 2) throw ConfigError("--grid must have at least two cells");
        oracle.max_rows = rows;
        oracle.max_cols = cols;
    }
    oracle.trials = options.trials;
    oracle.seed = options.seed;

    if (options.trials == 0) {
        err << "oracle: warning: zero trials requested, laws pass vacuously\n";
    }
    const OracleReport report = run_oracle(oracle);

    out << std::scientific << std::setprecision(3);
    out << (report.equivalence_ok ? "PASS" : "FAIL") << " equivalence: " << report.equivalence_passed << "/"
        << report.trials << " trials within rel " << oracle.rel_tolerance << " (max abs diff "
        << report.equivalence_max_abs_diff << ", max rel diff " << report.equivalence_max_rel_diff << ")\n";
    Json divergence = Json::object();
    for (const auto& d : report.divergence) {
        const bool ok = d.rate() >= oracle.required_divergence_rate;
        out << (ok ? "PASS" : "FAIL") << " divergence[" << to_string(d.strategy) << "]: " << d.diverged << "/"
            << d.eligible << " eligible trials diverged (rate " << std::fixed << std::setprecision(3) << d.rate()
            << ", excluded " << d.excluded << ", min max-abs-diff " << std::scientific << d.min_max_abs_diff
            << ")\n";
        divergence[std::string(to_string(d.strategy))] = {{"eligible", d.eligible},
                                                          {"excluded", d.excluded},
                                                          {"diverged", d.diverged},
                                                          {"rate", d.rate()},
                                                          {"min_max_abs_diff", d.min_max_abs_diff}};
    }
    out << std::defaultfloat;

    RunManifest manifest;
    manifest.command = "oracle";
    manifest.options = {{"grid", options.grid}, {"trials", options.trials}, {"seed", options.seed}};
    manifest.seed = options.seed;
    manifest.metrics = {{"trials", report.trials},
                        {"equivalence_passed", report.equivalence_passed},
                        {"equivalence_max_abs_diff", report.equivalence_max_abs_diff},
                        {"equivalence_max_rel_diff", report.equivalence_max_rel_diff},
                        {"divergence", divergence},
                        {"passed", report.passed()}};
    manifest.outputs = {options.out};
    manifest.write(options.out);
    return report.passed() ? kExitOk : 1;
}

}  // namespace prunedoc::cli
