#include "midec/arch.hpp"
#include "midec/checkpoint.hpp"
#include "midec/dataset.hpp"
#include "midec/dsp.hpp"
#include "midec/evalharness.hpp"
#include "midec/fbcsp.hpp"
#include "midec/synth.hpp"
#include "midec/textio.hpp"
#include "midec/train.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

// Containers live as <stem>.json + <stem>.f32; a directory holds one under
// the stem "dataset".
std::string resolve_container_stem(const std::string& data_arg) {
    const fs::path as_dir = fs::path(data_arg) / "dataset";
    if (fs::exists(as_dir.string() + ".json")) return as_dir.string();
    if (fs::exists(data_arg + ".json")) return data_arg;
    throw std::runtime_error("--data: no dataset container at `" + data_arg +
                             "` (expected " + as_dir.string() + ".json or " + data_arg +
                             ".json)");
}

std::string container_stem_for_out(const std::string& out_dir) {
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / "dataset").string();
}

const char* cli_model_name(midec::model::ModelKind kind) {
    return kind == midec::model::ModelKind::BfrCnn ? "bfr" : "shallow";
}

void cmd_synth(const std::string& out_dir, std::uint64_t seed, std::size_t n_per_class,
               const std::string& params_file) {
    midec::synth::GeneratorParams params = midec::synth::default_params();
    if (!params_file.empty())
        params = midec::synth::params_from_json(midec::read_file(params_file));
    const midec::EpochedDataset ds = midec::synth::generate_dataset(n_per_class, params, seed);
    const std::string stem = container_stem_for_out(out_dir);
    midec::data::write_dataset(ds, stem);
    std::cout << "wrote " << stem << ".{json,f32}: " << ds.n_epochs() << " epochs, "
              << ds.n_channels << " channels x " << ds.n_samples << " samples at " << ds.fs
              << " Hz\n";
}

void cmd_import_csv(const std::string& in_dir, double fs, const std::string& out_dir) {
    // Collect class labels from the sidecar in first-appearance order.
    const fs::path index_path = fs::path(in_dir) / "index.csv";
    if (!fs::exists(index_path))
        throw std::runtime_error("--in: missing sidecar " + index_path.string());
    std::ifstream idx(index_path);
    std::string line;
    std::vector<std::string> class_names;
    std::map<std::string, int> class_map;
    std::size_t row = 0;
    while (std::getline(idx, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = midec::split_csv_line(line);
        if (cells.size() != 2)
            throw std::runtime_error("index.csv row " + std::to_string(row) +
                                     " must be `filename,label`");
        if (row == 1 && cells[0] == "filename") continue;
        if (class_map.find(cells[1]) == class_map.end()) {
            class_map[cells[1]] = static_cast<int>(class_names.size());
            class_names.push_back(cells[1]);
        }
    }

    std::string warning;
    const midec::EpochedDataset ds =
        midec::data::import_csv(in_dir, fs, class_map, class_names, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    const std::string stem = container_stem_for_out(out_dir);
    midec::data::write_dataset(ds, stem);
    std::cout << "imported " << ds.n_epochs() << " epochs (" << class_names.size()
              << " classes) into " << stem << ".{json,f32}\n";
}

void cmd_train(const std::string& data_arg, const std::string& model_name, std::uint64_t seed,
               const std::string& out_path, std::size_t epochs, std::size_t batch,
               bool tuning_flags_given) {
    const midec::EpochedDataset ds =
        midec::data::read_dataset(resolve_container_stem(data_arg));
    const midec::eval::EvalModel which = midec::eval::eval_model_from_string(model_name);

    if (which == midec::eval::EvalModel::Fbcsp) {
        if (tuning_flags_given)
            std::cerr << "note: fbcsp training is deterministic; --seed/--epochs/--batch are "
                         "ignored\n";
        const midec::fbcsp::FbcspModel model = midec::fbcsp::fbcsp_fit(ds);
        midec::write_file_atomic(out_path, midec::fbcsp::fbcsp_to_json(model));
        const midec::eval::EvalResult r = midec::eval::evaluate(model, ds);
        std::cout << "wrote " << out_path << "; training-set accuracy "
                  << midec::num_fixed(r.accuracy, 4) << "\n";
        return;
    }

    const auto kind = which == midec::eval::EvalModel::Bfr
                          ? midec::model::ModelKind::BfrCnn
                          : midec::model::ModelKind::ShallowConvNet;
    const midec::model::ArchitectureConfig arch =
        midec::model::arch_for(ds.fs, ds.n_samples, ds.n_channels, ds.class_names.size());
    midec::model::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.rng_seed = seed;
    const midec::model::TrainedNetwork net = midec::model::train(kind, arch, ds, cfg);
    midec::model::write_checkpoint(net, out_path);
    std::cout << "wrote " << out_path << "; final training epoch: loss "
              << midec::num_fixed(net.history.back().loss, 4) << ", accuracy "
              << midec::num_fixed(net.history.back().accuracy, 4) << "\n";
}

void cmd_eval(const std::string& data_arg, const std::string& model_file,
              const std::string& out_path) {
    const midec::EpochedDataset ds =
        midec::data::read_dataset(resolve_container_stem(data_arg));
    const std::string blob = midec::read_file(model_file);

    std::string model_name;
    midec::eval::EvalResult result;
    if (blob.rfind("MIDECKPT", 0) == 0) {
        const midec::model::TrainedNetwork net = midec::model::load_checkpoint(blob);
        model_name = cli_model_name(net.kind);
        result = midec::eval::evaluate(net, ds);
    } else {
        const midec::fbcsp::FbcspModel model = midec::fbcsp::fbcsp_from_json(blob);
        model_name = "fbcsp";
        result = midec::eval::evaluate(model, ds);
    }
    midec::write_file_atomic(
        out_path, midec::eval::metrics_json(model_name, data_arg, {result.accuracy},
                                            result.confusion));
    std::cout << "wrote " << out_path << "; accuracy " << midec::num_fixed(result.accuracy, 4)
              << " over " << ds.n_epochs() << " epochs\n";
}

void cmd_compare(std::size_t subjects, const std::string& models_arg, std::size_t cv,
                 std::uint64_t seed, const std::string& out_dir, std::size_t n_per_class,
                 std::size_t epochs, std::size_t batch) {
    midec::eval::CompareConfig cfg;
    std::string token;
    for (std::size_t i = 0; i <= models_arg.size(); ++i) {
        if (i == models_arg.size() || models_arg[i] == ',') {
            if (!token.empty()) cfg.models.push_back(midec::eval::eval_model_from_string(token));
            token.clear();
        } else {
            token += models_arg[i];
        }
    }
    if (cfg.models.empty()) throw std::runtime_error("--models: empty model list");

    cfg.subjects = midec::eval::default_subjects(subjects, seed, n_per_class,
                                                 midec::synth::default_params());
    cfg.k_folds = cv;
    cfg.seed = seed;
    cfg.train.epochs = epochs;
    cfg.train.batch_size = batch;
    cfg.out_dir = out_dir;

    const midec::eval::ComparisonTable table = midec::eval::compare(cfg);
    std::cout << midec::eval::table_to_text(table) << "files in " << out_dir << "\n";
}

void cmd_bandpower(const std::string& data_arg, const std::vector<double>& band,
                   const std::string& out_path) {
    if (band.size() != 2 || band[0] <= 0.0 || band[1] <= band[0])
        throw std::runtime_error("--band: expected LOW,HIGH with 0 < LOW < HIGH");
    const midec::EpochedDataset ds =
        midec::data::read_dataset(resolve_container_stem(data_arg));

    std::string csv = "epoch,label,class";
    for (const auto& name : ds.channel_names) csv += "," + name;
    csv += "\n";
    for (std::size_t e = 0; e < ds.n_epochs(); ++e) {
        const auto power = midec::dsp::bandpower(ds.epoch(e), ds.n_channels, ds.n_samples,
                                                 ds.fs, band[0], band[1]);
        csv += std::to_string(e) + "," + std::to_string(ds.labels[e]) + "," +
               ds.class_names[static_cast<std::size_t>(ds.labels[e])];
        for (double p : power) csv += "," + midec::num_to_string(p);
        csv += "\n";
    }
    midec::write_file_atomic(out_path, csv);
    std::cout << "wrote " << out_path << ": " << ds.n_epochs() << " epochs x "
              << ds.n_channels << " channels, band " << band[0] << "-" << band[1] << " Hz\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"motor-imagery EEG pipeline: synthesis, training, evaluation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset container");
    std::string synth_out, synth_params;
    std::uint64_t synth_seed = 1;
    std::size_t synth_n = 50;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", synth_seed, "master generator seed");
    synth->add_option("--n-per-class", synth_n, "epochs per class")->check(CLI::PositiveNumber);
    synth->add_option("--params", synth_params, "JSON file of generator parameter overrides")
        ->check(CLI::ExistingFile);

    // import-csv
    auto* imp = app.add_subcommand("import-csv", "import per-epoch CSV files + index.csv");
    std::string imp_in, imp_out;
    double imp_fs = 0.0;
    imp->add_option("--in", imp_in, "directory of epoch CSVs with index.csv")
        ->required()
        ->check(CLI::ExistingDirectory);
    imp->add_option("--fs", imp_fs, "sampling rate in Hz")->required()->check(CLI::PositiveNumber);
    imp->add_option("--out", imp_out, "output directory for the container")->required();

    // train
    auto* train = app.add_subcommand("train", "train a model on a dataset container");
    std::string train_data, train_model, train_out;
    std::uint64_t train_seed = 1;
    std::size_t train_epochs = 200, train_batch = 32;
    train->add_option("--data", train_data, "dataset directory or container stem")->required();
    train->add_option("--model", train_model, "bfr | shallow | fbcsp")->required();
    train->add_option("--seed", train_seed, "training seed (init + shuffling)");
    train->add_option("--out", train_out, "output model file")->required();
    train->add_option("--epochs", train_epochs, "training epochs")->check(CLI::PositiveNumber);
    train->add_option("--batch", train_batch, "mini-batch size")->check(CLI::PositiveNumber);

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a trained model on a dataset");
    std::string eval_data, eval_model_file, eval_out;
    eval->add_option("--data", eval_data, "dataset directory or container stem")->required();
    eval->add_option("--model-file", eval_model_file, "checkpoint or fbcsp model file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--out", eval_out, "metrics JSON output path")->required();

    // compare
    auto* cmp = app.add_subcommand("compare", "k-fold comparison across synthetic subjects");
    std::size_t cmp_subjects = 8, cmp_cv = 5, cmp_n = 50, cmp_epochs = 200, cmp_batch = 32;
    std::string cmp_models = "bfr,shallow,fbcsp", cmp_out;
    std::uint64_t cmp_seed = 1;
    cmp->add_option("--subjects", cmp_subjects, "number of synthetic subjects")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--models", cmp_models, "comma list from {bfr, shallow, fbcsp}");
    cmp->add_option("--cv", cmp_cv, "cross-validation folds");
    cmp->add_option("--seed", cmp_seed, "harness seed (also the first subject seed)");
    cmp->add_option("--out", cmp_out, "output directory")->required();
    cmp->add_option("--n-per-class", cmp_n, "epochs per class per subject")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--epochs", cmp_epochs, "CNN training epochs")->check(CLI::PositiveNumber);
    cmp->add_option("--batch", cmp_batch, "CNN mini-batch size")->check(CLI::PositiveNumber);

    // bandpower
    auto* bp = app.add_subcommand("bandpower", "per-epoch per-channel band power CSV");
    std::string bp_data, bp_out;
    std::vector<double> bp_band;
    bp->add_option("--data", bp_data, "dataset directory or container stem")->required();
    bp->add_option("--band", bp_band, "LOW,HIGH band edges in Hz")
        ->required()
        ->delimiter(',')
        ->expected(2);
    bp->add_option("--out", bp_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed()) cmd_synth(synth_out, synth_seed, synth_n, synth_params);
        if (imp->parsed()) cmd_import_csv(imp_in, imp_fs, imp_out);
        if (train->parsed()) {
            const bool tuning = train->count("--seed") || train->count("--epochs") ||
                                train->count("--batch");
            cmd_train(train_data, train_model, train_seed, train_out, train_epochs, train_batch,
                      tuning);
        }
        if (eval->parsed()) cmd_eval(eval_data, eval_model_file, eval_out);
        if (cmp->parsed())
            cmd_compare(cmp_subjects, cmp_models, cmp_cv, cmp_seed, cmp_out, cmp_n, cmp_epochs,
                        cmp_batch);
        if (bp->parsed()) cmd_bandpower(bp_data, bp_band, bp_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
