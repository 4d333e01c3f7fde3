#pragma once

#include "midec/adam.hpp"
#include "midec/arch.hpp"
#include "midec/dataset.hpp"
#include "midec/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace midec::model {

struct TrainConfig {
    std::size_t batch_size = 32;
    std::size_t epochs = 200;
    double learning_rate = 1e-3; // Adam; beta/epsilon stay at the AdamState defaults
    std::uint64_t rng_seed = 1;
    bool shuffle = true;

    void validate() const;
};

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainedNetwork {
    ModelKind kind;
    ArchitectureConfig arch;
    nn::Network<float> net;
    std::vector<EpochStats> history; // one entry per training epoch

    // Freshly built, parameters zero until init or load.
    TrainedNetwork(ModelKind k, const ArchitectureConfig& a);
};

// Mini-batch Adam over shuffled batches; deterministic in cfg.rng_seed.
TrainedNetwork train(ModelKind kind, const ArchitectureConfig& arch,
                     const EpochedDataset& train_set, const TrainConfig& cfg);

struct Prediction {
    std::vector<int> labels;
    std::vector<std::vector<float>> probs; // [epoch][class]
};

// Softmax argmax per epoch; exact ties resolve to the lowest class index.
Prediction predict(const TrainedNetwork& net, const EpochedDataset& epochs);

// "epoch,loss,accuracy" CSV with a header line.
std::string history_to_csv(const std::vector<EpochStats>& history);

} // namespace midec::model
