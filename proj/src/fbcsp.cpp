#include "midec/fbcsp.hpp"

#include "midec/dsp.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace midec::fbcsp {

namespace {

// Bandpass-filter one raw epoch, center each channel, and return the centered
// scatter matrix X X^T (the covariance up to a positive scale).
Eigen::MatrixXd band_scatter(const dsp::BiquadCascade& band, const float* epoch,
                             std::size_t n_channels, std::size_t n_samples) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n_channels), static_cast<Eigen::Index>(n_samples));
    std::vector<double> row(n_samples);
    for (std::size_t c = 0; c < n_channels; ++c) {
        const float* src = epoch + c * n_samples;
        for (std::size_t t = 0; t < n_samples; ++t) row[t] = static_cast<double>(src[t]);
        const std::vector<double> filtered = dsp::filtfilt(band, row);
        for (std::size_t t = 0; t < n_samples; ++t)
            x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = filtered[t];
    }
    x.colwise() -= x.rowwise().mean();
    return x * x.transpose();
}

std::vector<dsp::BiquadCascade> design_bank(const std::vector<std::pair<double, double>>& bands,
                                            double fs) {
    std::vector<dsp::BiquadCascade> bank;
    bank.reserve(bands.size());
    for (const auto& [lo, hi] : bands) bank.push_back(dsp::design_butterworth_bandpass(lo, hi, fs, 4));
    return bank;
}

} // namespace

std::vector<std::pair<double, double>> default_bands() {
    std::vector<std::pair<double, double>> bands;
    for (double lo = 4.0; lo < 40.0 - 1e-9; lo += 4.0) bands.emplace_back(lo, lo + 4.0);
    return bands;
}

FbcspModel fbcsp_fit(const EpochedDataset& train, const std::vector<std::pair<double, double>>& bands,
                     std::size_t m_pairs) {
    train.validate();
    if (bands.empty()) throw std::invalid_argument("fbcsp_fit: band list is empty");
    if (m_pairs < 1) throw std::invalid_argument("fbcsp_fit: m_pairs must be at least 1");
    const std::size_t n_classes = train.class_names.size();
    if (n_classes < 2) throw std::invalid_argument("fbcsp_fit: need at least 2 classes");

    const std::size_t n = train.n_epochs();
    std::vector<std::size_t> class_count(n_classes, 0);
    for (int label : train.labels) ++class_count[static_cast<std::size_t>(label)];
    for (std::size_t k = 0; k < n_classes; ++k)
        if (class_count[k] < 2)
            throw std::invalid_argument("fbcsp_fit: class '" + train.class_names[k] + "' has " +
                                        std::to_string(class_count[k]) +
                                        " epochs; at least 2 are required");

    FbcspModel model;
    model.fs = train.fs;
    model.n_channels = train.n_channels;
    model.n_samples = train.n_samples;
    model.m_pairs = m_pairs;
    model.bands = bands;
    model.class_names = train.class_names;

    const auto bank = design_bank(bands, train.fs);
    const auto c = static_cast<Eigen::Index>(train.n_channels);

    // Per band, per epoch: centered scatter plus its trace-normalized form.
    std::vector<std::vector<Eigen::MatrixXd>> scatters(bands.size());
    std::vector<std::vector<Eigen::MatrixXd>> normalized(bands.size());
    for (std::size_t b = 0; b < bands.size(); ++b) {
        scatters[b].reserve(n);
        normalized[b].reserve(n);
        for (std::size_t e = 0; e < n; ++e) {
            Eigen::MatrixXd s = band_scatter(bank[b], train.epoch(e), train.n_channels, train.n_samples);
            const double tr = s.trace();
            if (!(tr > 0.0))
                throw std::invalid_argument("fbcsp_fit: epoch " + std::to_string(e) +
                                            " has zero energy in band " +
                                            std::to_string(bands[b].first) + "-" +
                                            std::to_string(bands[b].second) + " Hz");
            normalized[b].push_back(s / tr);
            scatters[b].push_back(std::move(s));
        }
    }

    model.csp.resize(n_classes);
    model.lda.reserve(n_classes);
    const auto nf = static_cast<Eigen::Index>(model.n_features());
    for (std::size_t k = 0; k < n_classes; ++k) {
        model.csp[k].reserve(bands.size());
        for (std::size_t b = 0; b < bands.size(); ++b) {
            Eigen::MatrixXd cov_t = Eigen::MatrixXd::Zero(c, c);
            Eigen::MatrixXd cov_r = Eigen::MatrixXd::Zero(c, c);
            for (std::size_t e = 0; e < n; ++e)
                (train.labels[e] == static_cast<int>(k) ? cov_t : cov_r) += normalized[b][e];
            cov_t /= static_cast<double>(class_count[k]);
            cov_r /= static_cast<double>(n - class_count[k]);
            CspModel csp = csp_fit(cov_t, cov_r, m_pairs);
            csp.band_low = bands[b].first;
            csp.band_high = bands[b].second;
            model.ridge_events += csp.ridge_applied;
            model.csp[k].push_back(std::move(csp));
        }

        Eigen::MatrixXd feats(static_cast<Eigen::Index>(n), nf);
        for (std::size_t e = 0; e < n; ++e) {
            Eigen::Index col = 0;
            for (std::size_t b = 0; b < bands.size(); ++b) {
                const std::vector<double> f = csp_features_from_scatter(model.csp[k][b], scatters[b][e]);
                for (double v : f) feats(static_cast<Eigen::Index>(e), col++) = v;
            }
        }
        std::vector<int> y(n);
        for (std::size_t e = 0; e < n; ++e) y[e] = train.labels[e] == static_cast<int>(k) ? 1 : 0;
        model.lda.push_back(shrinkage_lda_fit(feats, y));
    }
    return model;
}

std::vector<double> fbcsp_scores(const FbcspModel& model, const float* epoch,
                                 std::size_t n_channels, std::size_t n_samples) {
    if (n_channels != model.n_channels)
        throw std::invalid_argument("fbcsp_scores: epoch has " + std::to_string(n_channels) +
                                    " channels but the model expects " +
                                    std::to_string(model.n_channels));
    if (n_samples < 2) throw std::invalid_argument("fbcsp_scores: epoch too short");

    const auto bank = design_bank(model.bands, model.fs);
    std::vector<double> features(model.n_features());
    std::vector<Eigen::MatrixXd> scatters;
    scatters.reserve(bank.size());
    for (const auto& band : bank) scatters.push_back(band_scatter(band, epoch, n_channels, n_samples));

    std::vector<double> scores(model.n_classes());
    for (std::size_t k = 0; k < model.n_classes(); ++k) {
        std::size_t at = 0;
        for (std::size_t b = 0; b < model.bands.size(); ++b) {
            const std::vector<double> f = csp_features_from_scatter(model.csp[k][b], scatters[b]);
            for (double v : f) features[at++] = v;
        }
        scores[k] = lda_score(model.lda[k], features.data(), features.size());
    }
    return scores;
}

int fbcsp_predict(const FbcspModel& model, const float* epoch, std::size_t n_channels,
                  std::size_t n_samples) {
    const std::vector<double> scores = fbcsp_scores(model, epoch, n_channels, n_samples);
    int best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
        if (scores[k] > scores[best]) best = static_cast<int>(k);
    return best;
}

std::string fbcsp_to_json(const FbcspModel& model) {
    nlohmann::json j;
    j["kind"] = "fbcsp";
    j["format_version"] = 1;
    j["fs"] = model.fs;
    j["n_channels"] = model.n_channels;
    j["n_samples"] = model.n_samples;
    j["m_pairs"] = model.m_pairs;
    j["class_names"] = model.class_names;
    j["ridge_events"] = model.ridge_events;
    auto bands = nlohmann::json::array();
    for (const auto& [lo, hi] : model.bands) bands.push_back({lo, hi});
    j["bands"] = std::move(bands);
    auto csp = nlohmann::json::array();
    for (const auto& per_band : model.csp) {
        auto row = nlohmann::json::array();
        for (const auto& m : per_band) {
            row.push_back({{"band_low", m.band_low},
                           {"band_high", m.band_high},
                           {"n_channels", m.n_channels},
                           {"m_pairs", m.m_pairs},
                           {"filters", m.filters},
                           {"eigenvalues", m.eigenvalues},
                           {"ridge_applied", m.ridge_applied}});
        }
        csp.push_back(std::move(row));
    }
    j["csp"] = std::move(csp);
    auto lda = nlohmann::json::array();
    for (const auto& m : model.lda)
        lda.push_back({{"w", m.w}, {"b", m.b}, {"gamma", m.gamma}});
    j["lda"] = std::move(lda);
    return j.dump();
}

FbcspModel fbcsp_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("fbcsp model: malformed JSON: ") + e.what());
    }
    try {
        if (j.at("kind").get<std::string>() != "fbcsp")
            throw std::runtime_error("fbcsp model: kind is `" + j.at("kind").get<std::string>() +
                                     "`, expected `fbcsp`");
        if (j.at("format_version").get<int>() != 1)
            throw std::runtime_error("fbcsp model: version mismatch: file has " +
                                     std::to_string(j.at("format_version").get<int>()) +
                                     ", reader expects 1");
        FbcspModel m;
        m.fs = j.at("fs").get<double>();
        m.n_channels = j.at("n_channels").get<std::size_t>();
        m.n_samples = j.at("n_samples").get<std::size_t>();
        m.m_pairs = j.at("m_pairs").get<std::size_t>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.ridge_events = j.at("ridge_events").get<int>();
        for (const auto& band : j.at("bands")) {
            if (!band.is_array() || band.size() != 2)
                throw std::runtime_error("fbcsp model: malformed band entry");
            m.bands.emplace_back(band[0].get<double>(), band[1].get<double>());
        }
        for (const auto& row : j.at("csp")) {
            std::vector<CspModel> per_band;
            for (const auto& e : row) {
                CspModel c;
                c.band_low = e.at("band_low").get<double>();
                c.band_high = e.at("band_high").get<double>();
                c.n_channels = e.at("n_channels").get<std::size_t>();
                c.m_pairs = e.at("m_pairs").get<std::size_t>();
                c.filters = e.at("filters").get<std::vector<double>>();
                c.eigenvalues = e.at("eigenvalues").get<std::vector<double>>();
                c.ridge_applied = e.at("ridge_applied").get<int>();
                if (c.filters.size() != c.n_filters() * c.n_channels ||
                    c.eigenvalues.size() != c.n_filters())
                    throw std::runtime_error("fbcsp model: CSP block sizes are inconsistent");
                per_band.push_back(std::move(c));
            }
            m.csp.push_back(std::move(per_band));
        }
        for (const auto& e : j.at("lda")) {
            LdaModel l;
            l.w = e.at("w").get<std::vector<double>>();
            l.b = e.at("b").get<double>();
            l.gamma = e.at("gamma").get<double>();
            m.lda.push_back(std::move(l));
        }
        if (m.csp.size() != m.n_classes() || m.lda.size() != m.n_classes())
            throw std::runtime_error("fbcsp model: per-class block count does not match classes");
        for (const auto& per_band : m.csp)
            if (per_band.size() != m.bands.size())
                throw std::runtime_error("fbcsp model: per-band block count does not match bands");
        for (const auto& l : m.lda)
            if (l.w.size() != m.n_features())
                throw std::runtime_error("fbcsp model: LDA weight length does not match features");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("fbcsp model: missing or mistyped field: ") +
                                 e.what());
    }
}

} // namespace midec::fbcsp
