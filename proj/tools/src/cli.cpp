#include "prunedoc_cli/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "prunedoc/errors.hpp"
#include "run_manifest.hpp"

namespace prunedoc::cli {

namespace {

constexpr const char* kSeedEnv = "PRUNEDOC_SEED";

std::string json_scalar(const Json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    return value.dump();
}

// Expands "--config file.json" into ordinary flags. Keys name long options
// without the leading dashes; flags given explicitly on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::vector<std::string> out;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("--config needs a file argument");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config_path.empty()) {
        return out;
    }
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + config_path + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");

    std::set<std::string> given;
    for (const auto& a : out) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos
                                                                                            : a.find('=') - 2));
    }
    for (const auto& [key, value] : doc.items()) {
        if (given.count(key) != 0) continue;
        if (value.is_array()) {
            for (const auto& v : value) {
                out.push_back("--" + key);
                out.push_back(json_scalar(v));
            }
        } else if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back("--" + key);
        } else {
            out.push_back("--" + key);
            out.push_back(json_scalar(value));
        }
    }
    return out;
}

void apply_seed_env(std::uint64_t& seed) {
    const char* env = std::getenv(kSeedEnv);
    if (env == nullptr || *env == '\0') {
        return;
    }
    try {
        std::size_t used = 0;
        const unsigned long long value = std::stoull(env, &used);
        if (used != std::char_traits<char>::length(env)) throw std::invalid_argument(env);
        seed = value;
    } catch (const std::exception&) {
        throw ConfigError(std::string(kSeedEnv) + " must be an unsigned integer");
    }
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"prunedoc: background-patch pruning for document images"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic annotated document corpus");
    synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--count", synth.count, "Number of documents")->capture_default_str();
    synth_cmd->add_option("--mode", synth.mode, "page or receipt")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Corpus seed")->capture_default_str();
    synth_cmd->add_option("--spec", synth.spec_file, "JSON layout spec (overrides --mode)");

    TrainOptions training;
    auto* train_cmd = app.add_subcommand("train", "Train the patch classifier on a corpus");
    train_cmd->add_option("--corpus", training.corpus_dir, "Corpus directory")->required();
    train_cmd->add_option("--patch-size", training.patch_size, "Patch side in pixels")->capture_default_str();
    train_cmd->add_option("--epochs", training.epochs)->capture_default_str();
    train_cmd->add_option("--seed", training.seed)->capture_default_str();
    train_cmd->add_option("--out", training.out, "Model file")->required();
    train_cmd->add_option("--cap", training.per_class_cap, "Patches kept per class")->capture_default_str();
    train_cmd->add_option("--hidden", training.hidden_dim)->capture_default_str();
    train_cmd->add_option("--batch-size", training.batch_size)->capture_default_str();
    train_cmd->add_option("--lr", training.learning_rate)->capture_default_str();
    train_cmd->add_option("--holdout", training.holdout, "Validation fraction")->capture_default_str();

    PruneOptions pruning;
    auto* prune_cmd = app.add_subcommand("prune", "Classify, pool and prune one image");
    prune_cmd->add_option("--model", pruning.model)->required();
    prune_cmd->add_option("--image", pruning.image)->required();
    prune_cmd->add_option("--pool", pruning.pool, "Odd max-pool window (1 disables)")->capture_default_str();
    prune_cmd->add_option("--strategy", pruning.strategy, "preserved|ordered|random|constant")
        ->capture_default_str();
    prune_cmd->add_option("--seed", pruning.seed)->capture_default_str();
    prune_cmd->add_option("--out", pruning.out_stem, "Output stem for .ptok.json/.ptok.bin")->required();
    prune_cmd->add_option("--mask-out", pruning.mask_out, "Also write the pooled mask as text");

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "Token and FLOPs reduction over token files");
    stats_cmd->add_option("--tokens", stats.token_globs, "Glob(s) of .ptok.json files")->required();
    stats_cmd->add_option("--profile", stats.profile, "Built-in profile name or JSON path")
        ->capture_default_str();
    stats_cmd->add_option("--out", stats.out, "Report path")->required();

    OverlayOptions overlay;
    auto* overlay_cmd = app.add_subcommand("overlay", "Render retained patches over the source image");
    overlay_cmd->add_option("--image", overlay.image)->required();
    overlay_cmd->add_option("--tokens", overlay.tokens)->required();
    overlay_cmd->add_option("--out", overlay.out)->required();

    OracleCommandOptions oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "Check index-preservation laws on a toy transformer");
    oracle_cmd->add_option("--grid", oracle.grid, "Maximum grid, RxC")->capture_default_str();
    oracle_cmd->add_option("--trials", oracle.trials)->capture_default_str();
    oracle_cmd->add_option("--seed", oracle.seed)->capture_default_str();
    oracle_cmd->add_option("--out", oracle.out, "Run manifest path")->capture_default_str();

    try {
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*synth_cmd) {
            apply_seed_env(synth.seed);
            return cmd_synth(synth, out);
        }
        if (*train_cmd) {
            apply_seed_env(training.seed);
            return cmd_train(training, out);
        }
        if (*prune_cmd) {
            apply_seed_env(pruning.seed);
            return cmd_prune(pruning, out);
        }
        if (*stats_cmd) {
            return cmd_stats(stats, out);
        }
        if (*overlay_cmd) {
            return cmd_overlay(overlay, out);
        }
        if (*oracle_cmd) {
            apply_seed_env(oracle.seed);
            return cmd_oracle(oracle, out, err);
        }
    } catch (const DegenerateDataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const MalformedInputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace prunedoc::cli
