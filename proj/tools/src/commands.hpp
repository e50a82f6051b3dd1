#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace prunedoc::cli {

struct SynthOptions {
    std::string out_dir;
    std::size_t count = 10;
    std::string mode = "page";
    std::uint64_t seed = 0;
    std::string spec_file;
};

struct TrainOptions {
    std::string corpus_dir;
    std::size_t patch_size = 28;
    std::size_t epochs = 8;
    std::uint64_t seed = 0;
    std::string out;
    std::size_t per_class_cap = 12000;
    std::size_t hidden_dim = 256;
    std::size_t batch_size = 256;
    double learning_rate = 1e-3;
    double holdout = 0.1;
};

struct PruneOptions {
    std::string model;
    std::string image;
    std::size_t pool = 3;
    std::string strategy = "preserved";
    std::uint64_t seed = 0;
    std::string out_stem;
    std::string mask_out;
};

struct StatsOptions {
    std::vector<std::string> token_globs;
    std::string profile = "3b-like";
    std::string out;
};

struct OverlayOptions {
    std::string image;
    std::string tokens;
    std::string out;
};

struct OracleCommandOptions {
    std::string grid = "8x8";
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    std::string out = "oracle.run.json";
};

int cmd_synth(const SynthOptions& options, std::ostream& out);
int cmd_train(const TrainOptions& options, std::ostream& out);
int cmd_prune(const PruneOptions& options, std::ostream& out);
int cmd_stats(const StatsOptions& options, std::ostream& out);
int cmd_overlay(const OverlayOptions& options, std::ostream& out);
int cmd_oracle(const OracleCommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace prunedoc::cli
