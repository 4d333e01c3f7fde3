#include "midec/evalharness.hpp"

#include "midec/arch.hpp"
#include "midec/rng.hpp"
#include "midec/textio.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace midec::eval {

namespace {

constexpr std::uint64_t kFoldSeedStream = 0x464F4C44;  // fold assignment
constexpr std::uint64_t kTrainSeedStream = 0x5452414E; // per-cell training
constexpr std::uint64_t kFoldTrainStream = 0x46545201; // per-fold within a cell

} // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names)
    : class_names(std::move(names)), counts(class_names.size() * class_names.size(), 0) {
    if (class_names.empty())
        throw std::invalid_argument("confusion matrix: need at least one class");
}

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (std::size_t c : counts) n += c;
    return n;
}

std::size_t ConfusionMatrix::diagonal() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < n_classes(); ++i) n += at(i, i);
    return n;
}

double ConfusionMatrix::accuracy() const {
    const std::size_t t = total();
    if (t == 0) throw std::logic_error("confusion matrix: no observations");
    return static_cast<double>(diagonal()) / static_cast<double>(t);
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::size_t n = 0;
    for (std::size_t p = 0; p < n_classes(); ++p) n += at(truth, p);
    return n;
}

void ConfusionMatrix::accumulate(const ConfusionMatrix& other) {
    if (other.class_names != class_names)
        throw std::invalid_argument("confusion matrix: cannot accumulate across class sets");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix confusion_from_labels(const std::vector<int>& truth,
                                      const std::vector<int>& predicted,
                                      const std::vector<std::string>& class_names) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("confusion matrix: " + std::to_string(truth.size()) +
                                    " true labels vs " + std::to_string(predicted.size()) +
                                    " predictions");
    if (truth.empty()) throw std::invalid_argument("confusion matrix: empty label set");
    ConfusionMatrix cm(class_names);
    const int k = static_cast<int>(class_names.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k)
            throw std::invalid_argument("confusion matrix: label out of range at index " +
                                        std::to_string(i));
        cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

std::string confusion_to_csv(const ConfusionMatrix& cm) {
    std::string out = "true\\predicted";
    for (const auto& name : cm.class_names) out += "," + name;
    out += "\n";
    for (std::size_t t = 0; t < cm.n_classes(); ++t) {
        out += cm.class_names[t];
        for (std::size_t p = 0; p < cm.n_classes(); ++p)
            out += "," + std::to_string(cm.at(t, p));
        out += "\n";
    }
    return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& labels,
                                                       std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: need k >= 2");
    if (labels.empty()) throw std::invalid_argument("stratified_kfold: no labels");

    int max_label = 0;
    for (int l : labels) {
        if (l < 0) throw std::invalid_argument("stratified_kfold: negative label");
        max_label = std::max(max_label, l);
    }
    std::vector<std::vector<std::size_t>> per_class(static_cast<std::size_t>(max_label) + 1);
    for (std::size_t i = 0; i < labels.size(); ++i)
        per_class[static_cast<std::size_t>(labels[i])].push_back(i);

    for (std::size_t c = 0; c < per_class.size(); ++c) {
        if (!per_class[c].empty() && per_class[c].size() < k)
            throw std::invalid_argument("stratified_kfold: class " + std::to_string(c) + " has " +
                                        std::to_string(per_class[c].size()) +
                                        " members, fewer than k=" + std::to_string(k));
    }

    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        auto& members = per_class[c];
        if (members.empty()) continue;
        Rng rng(derive_seed(seed, c));
        rng.shuffle(members);
        // Deal round-robin, rotating the starting fold per class so remainder
        // epochs do not all land in fold 0.
        for (std::size_t j = 0; j < members.size(); ++j)
            folds[(c + j) % k].push_back(members[j]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

EpochedDataset subset(const EpochedDataset& ds, const std::vector<std::size_t>& indices) {
    ds.validate();
    EpochedDataset out;
    out.n_channels = ds.n_channels;
    out.n_samples = ds.n_samples;
    out.fs = ds.fs;
    out.channel_names = ds.channel_names;
    out.class_names = ds.class_names;
    out.provenance = ds.provenance;
    const std::size_t per = ds.n_channels * ds.n_samples;
    out.data.reserve(indices.size() * per);
    for (std::size_t idx : indices) {
        if (idx >= ds.n_epochs())
            throw std::out_of_range("subset: epoch index " + std::to_string(idx) +
                                    " out of range (dataset has " +
                                    std::to_string(ds.n_epochs()) + ")");
        const float* src = ds.epoch(idx);
        out.data.insert(out.data.end(), src, src + per);
        out.labels.push_back(ds.labels[idx]);
        out.trial_ids.push_back(ds.trial_ids[idx]);
        out.subject_ids.push_back(ds.subject_ids[idx]);
    }
    out.validate();
    return out;
}

EvalResult evaluate(const model::TrainedNetwork& net, const EpochedDataset& test) {
    test.validate();
    if (test.n_epochs() == 0) throw std::invalid_argument("evaluate: empty test set");
    const model::Prediction pred = model::predict(net, test);
    EvalResult r;
    r.confusion = confusion_from_labels(test.labels, pred.labels, test.class_names);
    r.accuracy = r.confusion.accuracy();
    return r;
}

EvalResult evaluate(const fbcsp::FbcspModel& model, const EpochedDataset& test) {
    test.validate();
    if (test.n_epochs() == 0) throw std::invalid_argument("evaluate: empty test set");
    if (test.n_channels != model.n_channels || test.n_samples != model.n_samples)
        throw std::invalid_argument(
            "evaluate: dataset epochs are " + std::to_string(test.n_channels) + "x" +
            std::to_string(test.n_samples) + " but the model expects " +
            std::to_string(model.n_channels) + "x" + std::to_string(model.n_samples));
    if (test.class_names.size() != model.n_classes())
        throw std::invalid_argument("evaluate: dataset has " +
                                    std::to_string(test.class_names.size()) +
                                    " classes but the model expects " +
                                    std::to_string(model.n_classes()));
    std::vector<int> predicted;
    predicted.reserve(test.n_epochs());
    for (std::size_t e = 0; e < test.n_epochs(); ++e)
        predicted.push_back(
            fbcsp::fbcsp_predict(model, test.epoch(e), test.n_channels, test.n_samples));
    EvalResult r;
    r.confusion = confusion_from_labels(test.labels, predicted, test.class_names);
    r.accuracy = r.confusion.accuracy();
    return r;
}

const char* to_cli_name(EvalModel m) {
    switch (m) {
        case EvalModel::Bfr: return "bfr";
        case EvalModel::Shallow: return "shallow";
        case EvalModel::Fbcsp: return "fbcsp";
    }
    throw std::logic_error("unreachable model kind");
}

const char* to_display_name(EvalModel m) {
    switch (m) {
        case EvalModel::Bfr: return "BFR-CNN";
        case EvalModel::Shallow: return "ShallowConvNet";
        case EvalModel::Fbcsp: return "FBCSP+RLDA";
    }
    throw std::logic_error("unreachable model kind");
}

EvalModel eval_model_from_string(const std::string& name) {
    if (name == "bfr") return EvalModel::Bfr;
    if (name == "shallow") return EvalModel::Shallow;
    if (name == "fbcsp") return EvalModel::Fbcsp;
    throw std::invalid_argument("unknown model `" + name + "` (expected bfr, shallow or fbcsp)");
}

double CrossValResult::mean_accuracy() const {
    if (fold_accuracy.empty()) throw std::logic_error("cross-validation: no folds");
    double s = 0.0;
    for (double a : fold_accuracy) s += a;
    return s / static_cast<double>(fold_accuracy.size());
}

CrossValResult cross_validate(EvalModel m, const EpochedDataset& ds,
                              const std::vector<std::vector<std::size_t>>& folds,
                              const model::TrainConfig& train_cfg) {
    ds.validate();
    if (folds.size() < 2) throw std::invalid_argument("cross-validation: need at least 2 folds");

    CrossValResult result;
    result.confusion = ConfusionMatrix(ds.class_names);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& test_idx = folds[f];
        if (test_idx.empty())
            throw std::invalid_argument("cross-validation: fold " + std::to_string(f) +
                                        " is empty");
        std::vector<char> in_test(ds.n_epochs(), 0);
        for (std::size_t idx : test_idx) in_test[idx] = 1;
        std::vector<std::size_t> train_idx;
        train_idx.reserve(ds.n_epochs() - test_idx.size());
        for (std::size_t i = 0; i < ds.n_epochs(); ++i)
            if (!in_test[i]) train_idx.push_back(i);

        const EpochedDataset train_set = subset(ds, train_idx);
        const EpochedDataset test_set = subset(ds, test_idx);

        EvalResult er;
        if (m == EvalModel::Fbcsp) {
            er = evaluate(fbcsp::fbcsp_fit(train_set), test_set);
        } else {
            const model::ArchitectureConfig arch = model::arch_for(
                ds.fs, ds.n_samples, ds.n_channels, ds.class_names.size());
            model::TrainConfig tc = train_cfg;
            tc.rng_seed = derive_seed(train_cfg.rng_seed, kFoldTrainStream + f);
            const auto kind = m == EvalModel::Bfr ? model::ModelKind::BfrCnn
                                                  : model::ModelKind::ShallowConvNet;
            er = evaluate(model::train(kind, arch, train_set, tc), test_set);
        }
        result.fold_accuracy.push_back(er.accuracy);
        result.confusion.accumulate(er.confusion);
    }
    return result;
}

CrossValResult cross_validate(EvalModel m, const EpochedDataset& ds, std::size_t k,
                              std::uint64_t fold_seed, const model::TrainConfig& train_cfg) {
    return cross_validate(m, ds, stratified_kfold(ds.labels, k, fold_seed), train_cfg);
}

std::vector<SubjectSpec> default_subjects(std::size_t n, std::uint64_t first_seed,
                                          std::size_t n_per_class,
                                          const synth::GeneratorParams& params) {
    if (n == 0) throw std::invalid_argument("compare: need at least one subject");
    std::vector<SubjectSpec> subjects;
    subjects.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SubjectSpec s;
        const std::string num = std::to_string(i + 1);
        s.name = "subject-" + std::string(num.size() < 2 ? 2 - num.size() : 0, '0') + num;
        s.seed = first_seed + i;
        s.n_per_class = n_per_class;
        s.params = params;
        subjects.push_back(std::move(s));
    }
    return subjects;
}

std::vector<double> ComparisonTable::model_mean() const {
    std::vector<double> mean(models.size(), 0.0);
    for (const auto& row : cells)
        for (std::size_t m = 0; m < models.size(); ++m) mean[m] += row[m];
    for (double& v : mean) v /= static_cast<double>(cells.size());
    return mean;
}

std::vector<double> ComparisonTable::model_std() const {
    const std::vector<double> mean = model_mean();
    std::vector<double> var(models.size(), 0.0);
    for (const auto& row : cells)
        for (std::size_t m = 0; m < models.size(); ++m) {
            const double d = row[m] - mean[m];
            var[m] += d * d;
        }
    for (double& v : var) v = std::sqrt(v / static_cast<double>(cells.size()));
    return var;
}

std::string table_to_csv(const ComparisonTable& table) {
    std::string out = "dataset";
    for (EvalModel m : table.models) out += std::string(",") + to_cli_name(m);
    out += "\n";
    for (std::size_t d = 0; d < table.dataset_names.size(); ++d) {
        out += table.dataset_names[d];
        for (double v : table.cells[d]) out += "," + num_to_string(v);
        out += "\n";
    }
    out += "Avg.";
    for (double v : table.model_mean()) out += "," + num_to_string(v);
    out += "\nStd.";
    for (double v : table.model_std()) out += "," + num_to_string(v);
    out += "\n";
    return out;
}

std::string table_to_text(const ComparisonTable& table) {
    std::size_t col0 = std::string("Subject").size();
    for (const auto& name : table.dataset_names) col0 = std::max(col0, name.size());
    std::vector<std::size_t> widths;
    for (EvalModel m : table.models)
        widths.push_back(std::max<std::size_t>(std::string(to_display_name(m)).size(), 4));

    const auto pad_left = [](const std::string& s, std::size_t w) {
        return std::string(w > s.size() ? w - s.size() : 0, ' ') + s;
    };
    const auto pad_right = [](const std::string& s, std::size_t w) {
        return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
    };

    std::string out = pad_right("Subject", col0);
    for (std::size_t m = 0; m < table.models.size(); ++m)
        out += "  " + pad_left(to_display_name(table.models[m]), widths[m]);
    out += "\n";
    const auto emit_row = [&](const std::string& name, const std::vector<double>& vals) {
        out += pad_right(name, col0);
        for (std::size_t m = 0; m < vals.size(); ++m)
            out += "  " + pad_left(num_fixed(vals[m], 2), widths[m]);
        out += "\n";
    };
    for (std::size_t d = 0; d < table.dataset_names.size(); ++d)
        emit_row(table.dataset_names[d], table.cells[d]);
    emit_row("Avg.", table.model_mean());
    emit_row("Std.", table.model_std());
    return out;
}

ComparisonTable compare(const CompareConfig& cfg) {
    if (cfg.subjects.empty()) throw std::invalid_argument("compare: need at least one subject");
    if (cfg.models.empty()) throw std::invalid_argument("compare: need at least one model");
    if (cfg.k_folds < 2) throw std::invalid_argument("compare: need at least 2 folds");
    cfg.train.validate();

    const bool writing = !cfg.out_dir.empty();
    if (writing) std::filesystem::create_directories(cfg.out_dir);
    const auto out_path = [&](const std::string& file) {
        return (std::filesystem::path(cfg.out_dir) / file).string();
    };

    ComparisonTable table;
    table.models = cfg.models;
    std::vector<ConfusionMatrix> aggregate(cfg.models.size());

    for (std::size_t d = 0; d < cfg.subjects.size(); ++d) {
        const SubjectSpec& subj = cfg.subjects[d];
        const EpochedDataset ds =
            synth::generate_dataset(subj.n_per_class, subj.params, subj.seed);
        const auto folds = stratified_kfold(
            ds.labels, cfg.k_folds, derive_seed(derive_seed(cfg.seed, kFoldSeedStream), d));

        table.dataset_names.push_back(subj.name);
        table.cells.emplace_back();
        for (std::size_t m = 0; m < cfg.models.size(); ++m) {
            model::TrainConfig tc = cfg.train;
            tc.rng_seed = derive_seed(derive_seed(cfg.seed, kTrainSeedStream),
                                      d * cfg.models.size() + m);
            const CrossValResult cv = cross_validate(cfg.models[m], ds, folds, tc);
            table.cells.back().push_back(cv.mean_accuracy());
            if (aggregate[m].class_names.empty())
                aggregate[m] = ConfusionMatrix(ds.class_names);
            aggregate[m].accumulate(cv.confusion);
            if (writing)
                write_file_atomic(out_path("confusion_" + subj.name + "_" +
                                           to_cli_name(cfg.models[m]) + ".csv"),
                                  confusion_to_csv(cv.confusion));
        }
    }

    if (writing) {
        write_file_atomic(out_path("comparison.csv"), table_to_csv(table));
        write_file_atomic(out_path("comparison.txt"), table_to_text(table));
        for (std::size_t m = 0; m < cfg.models.size(); ++m)
            write_file_atomic(out_path("confusion_" + std::string(to_cli_name(cfg.models[m])) +
                                       "_aggregate.csv"),
                              confusion_to_csv(aggregate[m]));
    }
    return table;
}

std::string metrics_json(const std::string& model_name, const std::string& dataset_name,
                         const std::vector<double>& fold_accuracy, const ConfusionMatrix& cm) {
    if (fold_accuracy.empty()) throw std::invalid_argument("metrics: no fold accuracies");
    double mean = 0.0;
    for (double a : fold_accuracy) mean += a;
    mean /= static_cast<double>(fold_accuracy.size());

    nlohmann::json j;
    j["model"] = model_name;
    j["dataset"] = dataset_name;
    j["folds"] = fold_accuracy.size();
    j["accuracy_mean"] = mean;
    j["accuracy_per_fold"] = fold_accuracy;
    auto rows = nlohmann::json::array();
    for (std::size_t t = 0; t < cm.n_classes(); ++t) {
        auto row = nlohmann::json::array();
        for (std::size_t p = 0; p < cm.n_classes(); ++p) row.push_back(cm.at(t, p));
        rows.push_back(std::move(row));
    }
    j["confusion"] = {{"class_names", cm.class_names}, {"counts", std::move(rows)}};
    return j.dump(2) + "\n";
}

} // namespace midec::eval
