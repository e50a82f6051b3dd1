// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include "prunedoc/classifier.hpp"
#include "prunedoc/costmodel.hpp"
#include "prunedoc/errors.hpp"
#include "prunedoc/image_io.hpp"
#include "prunedoc/labeler.hpp"
#include "prunedoc/maskops.hpp"
#include "prunedoc/oracle.hpp"
#include "prunedoc/pruner.hpp"
#include "prunedoc/synthdoc.hpp"
#include "prunedoc_cli/cli.hpp"
#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;
using namespace prunedoc;

// Tolerances and budgets.
constexpr double kParamTolerance = 0.10;
constexpr double kMinAp = 0.97;
constexpr std::size_t kMinTrainingPatches = 20000;
constexpr double kTrainBudgetSeconds = 300.0;
constexpr int kDilationMasks = 1000;
constexpr std::size_t kMaxMaskSide = 32;
constexpr double kDilationBudgetSeconds = 5.0;
constexpr std::size_t kOracleTrials = 100;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr double kRetainedFraction = 0.343;
constexpr double kMinFlopsReduction = 60.0;
constexpr double kBlankBudgetSeconds = 5.0;
constexpr int kRoundTrips = 1000;
constexpr double kDeterminismBudgetSeconds = 30.0;
constexpr int kPoolingPages = 20;

constexpr std::size_t kPatch = 28;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

int cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = prunedoc::cli::run(std::move(args), out, err);
    if (code != 0 && code != prunedoc::cli::kExitFullyPruned) std::cerr << err.str();
    return code;
}

Json load_json(const fs::path& path) {
    std::ifstream in(path);
    return Json::parse(in);
}

// Shared state: the trained P=28 model feeds the fully-pruned and pooling checks.
struct Workspace {
    testing::TempDir dir{"acceptance"};
    fs::path model = dir / "model.bin";
    bool model_ready = false;
};

// -- 1 ----------------------------------------------------------------------------

Outcome parameter_counts() {
    struct Row {
        std::size_t patch;
        std::size_t exact;
        double reported;
    };
    const Row rows[] = {{14, 50689, 51e3}, {28, 201217, 203e3}, {56, 803329, 810e3}, {112, 3211777, 3000e3}};
    Outcome o{true, ""};
    double worst = 0.0;
    for (const auto& r : rows) {
        const std::size_t got = param_count(r.patch, 256);
        const std::size_t stored = ClassifierModel::zeros(r.patch, 256).stored_parameter_count();
        const double rel = std::abs(static_cast<double>(got) - r.reported) / r.reported;
        worst = std::max(worst, rel);
        o.pass = o.pass && got == r.exact && stored == got && rel <= kParamTolerance;
        o.detail += fmt("P=%zu:%zu ", r.patch, got);
    }
    o.detail += fmt("(worst deviation %.1f%%, limit %.0f%%)", 100.0 * worst, 100.0 * kParamTolerance);
    return o;
}

// -- 2 ----------------------------------------------------------------------------

Outcome classifier_quality(Workspace& ws) {
    const auto start = Clock::now();
    const fs::path corpus = ws.dir / "train_corpus";
    if (cli({"synth", "--out", corpus.string(), "--count", "6", "--mode", "page", "--seed", std::to_string(kSeed)}) != 0)
        return {false, "synth failed"};
    if (cli({"train", "--corpus", corpus.string(), "--patch-size", std::to_string(kPatch), "--cap", "12000",
             "--epochs", "8", "--seed", std::to_string(kSeed), "--out", ws.model.string()}) != 0)
        return {false, "train failed"};
    ws.model_ready = true;
    const double elapsed = seconds_since(start);

    const Json metrics = load_json(ws.model.string() + ".run.json")["metrics"];
    const std::size_t patches = metrics["train_patches"].get<std::size_t>() + metrics["val_patches"].get<std::size_t>();
    const double split_ap = metrics["val_ap"].get<double>();

    // Unseen documents: balanced patches from pages generated with a new seed.
    std::vector<LabeledImage> fresh;
    for (std::uint64_t s = 0; s < 2; ++s) {
        SynthDocument doc = generate(SynthSpec::page_default(), mix_seed(kSeed + 1, s));
        fresh.push_back({std::move(doc.image), std::move(doc.annotations)});
    }
    const PatchDataset holdout = build_dataset(fresh, kPatch, 3000, kSeed + 2);
    const ClassifierModel model = load_model(ws.model);
    std::vector<double> scores(holdout.size());
    for (std::size_t i = 0; i < holdout.size(); ++i) scores[i] = forward(model, holdout.pixels(i));
    const double doc_ap = average_precision(scores, holdout.labels());

    const bool balanced = metrics["text_patches"] == metrics["background_patches"];
    const bool pass = patches >= kMinTrainingPatches && balanced && split_ap >= kMinAp && doc_ap >= kMinAp &&
                      elapsed <= kTrainBudgetSeconds;
    return {pass, fmt("%zu balanced patches, holdout AP %.4f (split) / %.4f (unseen pages), min %.2f; %.1fs of %.0fs",
                      patches, split_ap, doc_ap, kMinAp, elapsed, kTrainBudgetSeconds)};
}

// -- 3 ----------------------------------------------------------------------------

BinaryMask window_max_3x3(const BinaryMask& m) {
    BinaryMask out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            bool any = false;
            for (std::size_t rr = r == 0 ? 0 : r - 1; rr <= std::min(r + 1, m.rows() - 1); ++rr) {
                for (std::size_t cc = c == 0 ? 0 : c - 1; cc <= std::min(c + 1, m.cols() - 1); ++cc) {
                    any = any || m.at(rr, cc);
                }
            }
            out.set(r, c, any);
        }
    }
    return out;
}

Outcome dilation_oracle() {
    const auto start = Clock::now();
    Rng rng(kSeed);
    int mismatches = 0;
    for (int i = 0; i < kDilationMasks; ++i) {
        BinaryMask m(1 + rng.below(kMaxMaskSide), 1 + rng.below(kMaxMaskSide));
        const double density = rng.uniform();
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) m.set(r, c, rng.uniform() < density);
        }
        mismatches += dilate(m, 3) == window_max_3x3(m) ? 0 : 1;
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed <= kDilationBudgetSeconds,
            fmt("%d/%d masks differ from the window-max oracle; %.2fs of %.0fs", mismatches, kDilationMasks,
                elapsed, kDilationBudgetSeconds)};
}

// -- 4 ----------------------------------------------------------------------------

Outcome index_preservation() {
    const auto start = Clock::now();
    OracleOptions options;
    options.max_rows = 8;
    options.max_cols = 8;
    options.trials = kOracleTrials;
    options.seed = kSeed;
    const OracleReport report = run_oracle(options);
    const double elapsed = seconds_since(start);
    std::string detail = fmt("equivalence %zu/%zu (max rel diff %.1e, tol %.0e); divergence", report.equivalence_passed,
                             report.trials, report.equivalence_max_rel_diff, options.rel_tolerance);
    for (const auto& d : report.divergence) {
        detail += fmt(" %s %zu/%zu", std::string(to_string(d.strategy)).c_str(), d.diverged, d.eligible);
    }
    detail += fmt(" (min %.0f%%); %.2fs of %.0fs", 100.0 * options.required_divergence_rate, elapsed,
                  kOracleBudgetSeconds);
    return {report.passed() && report.trials >= kOracleTrials && elapsed <= kOracleBudgetSeconds, detail};
}

// -- 5 ----------------------------------------------------------------------------

Outcome reduction_accounting() {
    const auto start = Clock::now();
    Rng rng(kSeed);
    int violations = 0;
    const int cases = 2000;
    for (int i = 0; i < cases; ++i) {
        PipelineProfile p;
        p.name = "random";
        p.vis_layers = 1 + rng.below(48);
        p.vis_dim = 1 + rng.below(4096);
        p.vis_ffn = 1 + rng.below(16384);
        p.merge_factor = 1 + rng.below(4);
        p.llm_layers = 1 + rng.below(48);
        p.llm_dim = 1 + rng.below(8192);
        p.llm_ffn = 1 + rng.below(32768);
        p.text_tokens = 0;
        // Whole merge groups, so the connector sees exactly r of the tokens.
        const std::size_t total = p.merge_factor * (1 + rng.below(4000));
        const std::size_t retained = p.merge_factor * (1 + rng.below(total / p.merge_factor));
        const double r = static_cast<double>(retained) / static_cast<double>(total);
        const double f = reduction_report(p, total, retained).flops_reduction;
        if (f < 100.0 * (1.0 - r) - 1e-9 || f > 100.0 * (1.0 - r * r) + 1e-9) ++violations;
    }

    // Grids of the synthetic A4 page and receipt at 28 px patches.
    const PipelineProfile p3b = builtin_profile_3b();
    bool large_ok = true;
    std::string sizes;
    for (const std::size_t total : {std::size_t{89 * 126}, std::size_t{33 * 93}}) {
        const auto retained = static_cast<std::size_t>(std::llround(kRetainedFraction * static_cast<double>(total)));
        const ReductionReport rep = reduction_report(p3b, total, retained);
        large_ok = large_ok && rep.flops_reduction >= kMinFlopsReduction;
        sizes += fmt(" n=%zu: %.1f%% tokens -> %.1f%% FLOPs;", total, rep.token_reduction, rep.flops_reduction);
    }
    const double elapsed = seconds_since(start);
    return {violations == 0 && large_ok && elapsed <= 1.0,
            fmt("%d/%d bound violations;", violations, cases) + sizes + fmt(" min %.0f%%", kMinFlopsReduction)};
}

// -- 6 ----------------------------------------------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
    return testing::read_bytes(a) == testing::read_bytes(b);
}

Outcome fully_pruned_contract(Workspace& ws) {
    if (!ws.model_ready) return {false, "no trained model (criterion 2 did not produce one)"};
    const auto start = Clock::now();
    const fs::path golden = PRUNEDOC_GOLDEN_DIR;
    const fs::path work = ws.dir / "blank";
    fs::create_directories(work);
    const fs::path stem = work / "blank_page";
    const int code = cli({"prune", "--model", ws.model.string(), "--image", (golden / "blank_page.png").string(),
                          "--out", stem.string()});
    const PrunedTokenSet set = read_tokens(stem.string() + ".ptok.json");
    const bool golden_match = same_bytes(stem.string() + ".ptok.json", golden / "blank_page.ptok.json") &&
                              same_bytes(stem.string() + ".ptok.bin", golden / "blank_page.ptok.bin");

    // Mix it with a page that keeps tokens.
    const fs::path page = ws.dir / "train_corpus" / "doc_0000.png";
    if (cli({"prune", "--model", ws.model.string(), "--image", page.string(), "--out", (work / "text_page").string()}) != 0)
        return {false, "pruning a text page failed"};
    if (cli({"stats", "--tokens", (work / "*.ptok.json").string(), "--out", (work / "stats.json").string()}) != 0)
        return {false, "stats failed"};
    const Json report = load_json(work / "stats.json");
    const PrunedTokenSet kept = read_tokens(work / "text_page.ptok.json");
    const double expected = reduction_report(builtin_profile_3b(), kept.grid_size(), kept.size()).flops_reduction;
    const bool listed = report["fully_pruned"].size() == 1 &&
                        report["fully_pruned"][0]["file"].get<std::string>().find("blank_page") != std::string::npos &&
                        report["fully_pruned"][0]["score"] == 0;
    const bool excluded = report["n_flops_files"] == 1 &&
                          std::abs(report["mean_flops_reduction"].get<double>() - expected) < 1e-9;
    const double elapsed = seconds_since(start);
    const bool pass = code == prunedoc::cli::kExitFullyPruned && set.empty() && golden_match && listed && excluded &&
                      elapsed <= kBlankBudgetSeconds;
    return {pass, fmt("exit %d, L=%zu, golden %s, stats lists score 0: %s, excluded from FLOPs mean: %s; %.2fs of %.0fs",
                      code, set.size(), golden_match ? "match" : "MISMATCH", listed ? "yes" : "no",
                      excluded ? "yes" : "no", elapsed, kBlankBudgetSeconds)};
}

// -- 7 ----------------------------------------------------------------------------

bool directories_identical(const fs::path& a, const fs::path& b, const std::string& skip) {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename().string();
        if (name == skip) continue;
        if (!fs::exists(b / name) || !same_bytes(entry.path(), b / name)) return false;
        ++count;
    }
    return count > 0;
}

Outcome determinism() {
    const auto start = Clock::now();
    testing::TempDir dir("determinism");
    const std::string seed = std::to_string(kSeed);
    std::ofstream(dir / "spec.json") << R"({"mode":"page","width":900,"height":1200,"margin":60})";
    for (const char* run : {"a", "b"}) {
        const fs::path root = dir / run;
        if (cli({"synth", "--out", (root / "corpus").string(), "--count", "3", "--seed", seed, "--spec",
                 (dir / "spec.json").string()}) != 0)
            return {false, "synth failed"};
        if (cli({"train", "--corpus", (root / "corpus").string(), "--out", (root / "model.bin").string(), "--epochs",
                 "2", "--cap", "2000", "--hidden", "64", "--seed", seed}) != 0)
            return {false, "train failed"};
        if (cli({"prune", "--model", (root / "model.bin").string(), "--image", (root / "corpus" / "doc_0001.png").string(),
                 "--strategy", "random", "--seed", seed, "--out", (root / "tokens").string()}) != 0)
            return {false, "prune failed"};
    }
    const bool corpus_same = directories_identical(dir / "a" / "corpus", dir / "b" / "corpus", "synth.run.json");
    const bool model_same = same_bytes(dir / "a" / "model.bin", dir / "b" / "model.bin");
    const bool tokens_same = same_bytes(dir / "a" / "tokens.ptok.json", dir / "b" / "tokens.ptok.json") &&
                             same_bytes(dir / "a" / "tokens.ptok.bin", dir / "b" / "tokens.ptok.bin");

    Rng rng(kSeed);
    int failures = 0;
    int empty = 0;
    for (int i = 0; i < kRoundTrips; ++i) {
        const std::size_t p = 1 + rng.below(8);
        const PatchGrid grid = extract_grid(testing::random_image(1 + rng.below(48), 1 + rng.below(48), rng), p);
        BinaryMask mask(grid.rows(), grid.cols());
        const double density = i % 10 == 0 ? 0.0 : rng.uniform();
        for (std::size_t r = 0; r < grid.rows(); ++r) {
            for (std::size_t c = 0; c < grid.cols(); ++c) mask.set(r, c, rng.uniform() < density);
        }
        const PrunedTokenSet set = reindex(prune(grid, mask), static_cast<IndexStrategy>(rng.below(4)), rng.next_u64());
        empty += set.empty() ? 1 : 0;
        try {
            failures += deserialize(serialize(set)) == set ? 0 : 1;
        } catch (const Error&) {
            ++failures;
        }
    }
    const double elapsed = seconds_since(start);
    const bool pass = corpus_same && model_same && tokens_same && failures == 0 && empty > 0 &&
                      elapsed <= kDeterminismBudgetSeconds;
    return {pass, fmt("corpus %s, model %s, tokens %s; %d/%d round-trips failed (%d with L=0); %.1fs of %.0fs",
                      corpus_same ? "identical" : "DIFFER", model_same ? "identical" : "DIFFER",
                      tokens_same ? "identical" : "DIFFER", failures, kRoundTrips, empty, elapsed,
                      kDeterminismBudgetSeconds)};
}

// -- 8 ----------------------------------------------------------------------------

double recall(const BinaryMask& mask, const LabelMap& labels) {
    std::size_t positives = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.values.size(); ++i) {
        if (labels.values[i] == 0) continue;
        ++positives;
        hits += mask.bits()[i];
    }
    return positives == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(positives);
}

Outcome pooling_recovers_fragments(const Workspace& ws) {
    if (!ws.model_ready) return {false, "no trained model (criterion 2 did not produce one)"};
    const ClassifierModel model = load_model(ws.model);
    int below_one = 0;
    int improved = 0;
    double min_raw = 1.0;
    double mean_raw = 0.0;
    double mean_pooled = 0.0;
    for (int page = 0; page < kPoolingPages; ++page) {
        const SynthDocument doc = generate(SynthSpec::page_default(), mix_seed(kSeed + 3, static_cast<std::uint64_t>(page)));
        const PatchGrid grid = extract_grid(doc.image, kPatch);
        const LabelMap labels = label_patches(grid, doc.annotations.boxes);
        const BinaryMask raw = threshold_logits(classify_grid(model, grid));
        const double r0 = recall(raw, labels);
        const double r1 = recall(dilate(raw, 3), labels);
        min_raw = std::min(min_raw, r0);
        mean_raw += r0 / kPoolingPages;
        mean_pooled += r1 / kPoolingPages;
        if (r0 < 1.0) {
            ++below_one;
            improved += r1 > r0 ? 1 : 0;
        }
    }
    return {improved == below_one,
            fmt("%d/%d pages with raw recall < 1 improved after 3x3 pooling (%d pages total; mean recall %.4f -> %.4f, "
                "min raw %.4f)",
                improved, below_one, kPoolingPages, mean_raw, mean_pooled, min_raw)};
}

}  // namespace

int main() {
    Workspace ws;
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const Criterion criteria[] = {
        {1, "parameter counts", parameter_counts},
        {2, "classifier quality", [&] { return classifier_quality(ws); }},
        {3, "dilation oracle", dilation_oracle},
        {4, "index-preservation equivalence", index_preservation},
        {5, "reduction accounting", reduction_accounting},
        {6, "fully-pruned contract", [&] { return fully_pruned_contract(ws); }},
        {7, "determinism and round-trips", determinism},
        {8, "pooling recovers fragmentation", [&] { return pooling_recovers_fragments(ws); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
    }
    std::cout << (8 - failed) << "/8 criteria passed" << std::endl;
    return failed;
}
