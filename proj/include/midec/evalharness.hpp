#pragma once

#include "midec/dataset.hpp"
#include "midec/fbcsp.hpp"
#include "midec/synth.hpp"
#include "midec/train.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace midec::eval {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::size_t> counts; // row-major K x K

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> names);

    std::size_t n_classes() const { return class_names.size(); }
    std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * n_classes() + predicted];
    }
    void add(std::size_t truth, std::size_t predicted) {
        ++counts[truth * n_classes() + predicted];
    }
    std::size_t total() const;
    std::size_t diagonal() const;
    double accuracy() const; // diagonal / total
    std::size_t row_sum(std::size_t truth) const;

    // Element-wise sum; class names must match exactly.
    void accumulate(const ConfusionMatrix& other);
};

ConfusionMatrix confusion_from_labels(const std::vector<int>& truth,
                                      const std::vector<int>& predicted,
                                      const std::vector<std::string>& class_names);

// Header row "true\\predicted,<names...>", then one row per true class.
std::string confusion_to_csv(const ConfusionMatrix& cm);

// k disjoint test-index sets partitioning 0..labels.size()-1. Per-class
// counts across folds differ by at most one; deterministic per seed.
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed);

// Copy the selected epochs (bookkeeping included) into a new dataset.
EpochedDataset subset(const EpochedDataset& ds, const std::vector<std::size_t>& indices);

struct EvalResult {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
};

EvalResult evaluate(const model::TrainedNetwork& net, const EpochedDataset& test);
EvalResult evaluate(const fbcsp::FbcspModel& model, const EpochedDataset& test);

// The three comparison arms.
enum class EvalModel { Bfr, Shallow, Fbcsp };

const char* to_cli_name(EvalModel m);     // bfr / shallow / fbcsp
const char* to_display_name(EvalModel m); // BFR-CNN / ShallowConvNet / FBCSP+RLDA
EvalModel eval_model_from_string(const std::string& name);

struct CrossValResult {
    std::vector<double> fold_accuracy;
    ConfusionMatrix confusion; // pooled over all folds
    double mean_accuracy() const;
};

// Train on k-1 folds, test on the held-out fold, for every fold. CNN arms
// derive their per-fold init/shuffle seed from train_cfg.rng_seed; the
// FBCSP arm is deterministic without one.
CrossValResult cross_validate(EvalModel m, const EpochedDataset& ds,
                              const std::vector<std::vector<std::size_t>>& folds,
                              const model::TrainConfig& train_cfg);
CrossValResult cross_validate(EvalModel m, const EpochedDataset& ds, std::size_t k,
                              std::uint64_t fold_seed, const model::TrainConfig& train_cfg);

// One synthetic "subject": a generator seed plus its parameters.
struct SubjectSpec {
    std::string name;
    std::uint64_t seed = 0;
    std::size_t n_per_class = 50;
    synth::GeneratorParams params = synth::default_params();
};

// subject-01..subject-NN with seeds first_seed, first_seed+1, ...
std::vector<SubjectSpec> default_subjects(std::size_t n, std::uint64_t first_seed,
                                          std::size_t n_per_class,
                                          const synth::GeneratorParams& params);

struct CompareConfig {
    std::vector<SubjectSpec> subjects;
    std::vector<EvalModel> models;
    std::size_t k_folds = 5;
    std::uint64_t seed = 1;        // harness seed: fold splits + training streams
    model::TrainConfig train;      // applies to the CNN arms
    std::string out_dir;           // empty = compute only, write nothing
};

struct ComparisonTable {
    std::vector<std::string> dataset_names;
    std::vector<EvalModel> models;
    std::vector<std::vector<double>> cells; // [dataset][model] mean fold accuracy

    // Aggregates recomputed from the cells (population standard deviation,
    // so a single dataset reports std 0).
    std::vector<double> model_mean() const;
    std::vector<double> model_std() const;
};

// Full-precision CSV: dataset column then one column per model, with Avg.
// and Std. rows recomputed from the cells.
std::string table_to_csv(const ComparisonTable& table);

// Aligned plain text, accuracies to 2 decimals.
std::string table_to_text(const ComparisonTable& table);

// Run every (subject, model) cell with k-fold CV. When out_dir is set,
// writes comparison.csv, comparison.txt, per-cell confusion matrices
// (confusion_<dataset>_<model>.csv) and per-model pooled matrices
// (confusion_<model>_aggregate.csv), all atomically and without
// timestamps, so reruns with identical inputs emit identical bytes.
ComparisonTable compare(const CompareConfig& cfg);

// metrics.json body: {model, dataset, folds, accuracy_mean,
// accuracy_per_fold, confusion:{class_names, counts}}.
std::string metrics_json(const std::string& model_name, const std::string& dataset_name,
                         const std::vector<double>& fold_accuracy, const ConfusionMatrix& cm);

} // namespace midec::eval
