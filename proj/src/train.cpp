#include "midec/train.hpp"

#include "midec/rng.hpp"
#include "midec/textio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace midec::model {

namespace {

constexpr std::uint64_t kShuffleStream = 0x53485546; // per-epoch batch order

void check_dataset_matches(const ArchitectureConfig& arch, const EpochedDataset& ds,
                           const char* who) {
    if (ds.n_channels != arch.n_channels || ds.n_samples != arch.epoch_len)
        throw std::invalid_argument(std::string(who) + ": dataset epochs are " +
                                    std::to_string(ds.n_channels) + "x" +
                                    std::to_string(ds.n_samples) + " but the architecture expects " +
                                    std::to_string(arch.n_channels) + "x" +
                                    std::to_string(arch.epoch_len));
    if (ds.class_names.size() != arch.n_classes)
        throw std::invalid_argument(std::string(who) + ": dataset has " +
                                    std::to_string(ds.class_names.size()) +
                                    " classes but the architecture expects " +
                                    std::to_string(arch.n_classes));
}

// Argmax with exact ties resolved toward the lowest class index.
int argmax_row(const float* row, std::size_t k) {
    int best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (row[j] > row[best]) best = static_cast<int>(j);
    return best;
}

} // namespace

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("TrainConfig: learning_rate must be positive");
}

TrainedNetwork::TrainedNetwork(ModelKind k, const ArchitectureConfig& a)
    : kind(k), arch(a), net(build_model(k, a), {1, 1, a.n_channels, a.epoch_len}) {}

TrainedNetwork train(ModelKind kind, const ArchitectureConfig& arch,
                     const EpochedDataset& train_set, const TrainConfig& cfg) {
    cfg.validate();
    train_set.validate();
    check_dataset_matches(arch, train_set, "train");

    std::vector<std::size_t> class_count(train_set.class_names.size(), 0);
    for (int label : train_set.labels) ++class_count[static_cast<std::size_t>(label)];
    for (std::size_t k = 0; k < class_count.size(); ++k)
        if (class_count[k] == 0)
            throw std::invalid_argument("train: class '" + train_set.class_names[k] +
                                        "' has no examples");

    TrainedNetwork out(kind, arch);
    out.net.init_params(cfg.rng_seed);

    nn::AdamState<float> adam;
    adam.lr = static_cast<float>(cfg.learning_rate);

    Rng shuffle_rng(derive_seed(cfg.rng_seed, kShuffleStream));
    const std::size_t n = train_set.n_epochs();
    const std::size_t epoch_sz = train_set.n_channels * train_set.n_samples;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    out.history.reserve(cfg.epochs);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t b = std::min(cfg.batch_size, n - start);
            nn::Tensor<float> x({b, 1, train_set.n_channels, train_set.n_samples});
            std::vector<int> labels(b);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t e = order[start + i];
                std::copy_n(train_set.epoch(e), epoch_sz, x.data.begin() +
                                                              static_cast<std::ptrdiff_t>(i * epoch_sz));
                labels[i] = train_set.labels[e];
            }
            const auto trace = out.net.forward(x, labels);
            if (!std::isfinite(trace.loss))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(start / cfg.batch_size + 1));
            const auto grads = out.net.backward(trace, labels);
            nn::adam_step(out.net, grads, adam);

            loss_sum += trace.loss * static_cast<double>(b);
            const std::size_t k = trace.probs.shape[1];
            for (std::size_t i = 0; i < b; ++i)
                correct += argmax_row(trace.probs.data.data() + i * k, k) == labels[i];
        }
        out.history.push_back(
            {loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)});
    }
    return out;
}

Prediction predict(const TrainedNetwork& net, const EpochedDataset& epochs) {
    epochs.validate();
    check_dataset_matches(net.arch, epochs, "predict");

    Prediction pred;
    const std::size_t n = epochs.n_epochs();
    const std::size_t epoch_sz = epochs.n_channels * epochs.n_samples;
    pred.labels.reserve(n);
    pred.probs.reserve(n);

    constexpr std::size_t kBatch = 32;
    for (std::size_t start = 0; start < n; start += kBatch) {
        const std::size_t b = std::min(kBatch, n - start);
        nn::Tensor<float> x({b, 1, epochs.n_channels, epochs.n_samples});
        for (std::size_t i = 0; i < b; ++i)
            std::copy_n(epochs.epoch(start + i), epoch_sz,
                        x.data.begin() + static_cast<std::ptrdiff_t>(i * epoch_sz));
        const auto trace = net.net.forward(x, {});
        const std::size_t k = trace.probs.shape[1];
        for (std::size_t i = 0; i < b; ++i) {
            const float* row = trace.probs.data.data() + i * k;
            pred.labels.push_back(argmax_row(row, k));
            pred.probs.emplace_back(row, row + k);
        }
    }
    return pred;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    std::string csv = "epoch,loss,accuracy\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        csv += std::to_string(i + 1) + "," + num_to_string(history[i].loss) + "," +
               num_to_string(history[i].accuracy) + "\n";
    return csv;
}

} // namespace midec::model
