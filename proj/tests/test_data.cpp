#include "doctest.h"
#include "test_util.hpp"

#include "midec/dataset.hpp"
#include "midec/rng.hpp"
#include "midec/textio.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace midec;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("midec_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

EpochedDataset make_dataset(std::size_t n_epochs, std::size_t n_channels = 3,
                            std::size_t n_samples = 40) {
    EpochedDataset ds;
    ds.n_channels = n_channels;
    ds.n_samples = n_samples;
    ds.fs = 250.0;
    ds.class_names = {"elbow", "grasp", "twist", "rest"};
    for (std::size_t c = 0; c < n_channels; ++c) ds.channel_names.push_back("ch" + std::to_string(c));
    Rng rng(31 + n_epochs);
    for (std::size_t e = 0; e < n_epochs; ++e) {
        ds.labels.push_back(static_cast<int>(e % 4));
        ds.trial_ids.push_back(static_cast<int>(e));
        ds.subject_ids.push_back(1);
        for (std::size_t i = 0; i < n_channels * n_samples; ++i) {
            ds.data.push_back(static_cast<float>(rng.normal()));
        }
    }
    ds.provenance = "unit test";
    return ds;
}

} // namespace

TEST_CASE("channel montage constant") {
    const auto& m = data::channel_montage();
    CHECK(m.size() == 24);
    CHECK(m.front() == "F3");
    CHECK(m[9] == "C3");
    CHECK(m[10] == "C1");
    CHECK(m.back() == "P4");
}

TEST_CASE("dataset container round-trips bit-exactly") {
    const auto dir = fresh_dir("roundtrip");
    const auto ds = make_dataset(200);
    const std::string stem = (dir / "set").string();
    data::write_dataset(ds, stem);
    const auto back = data::read_dataset(stem);
    CHECK(back.data == ds.data);
    CHECK(back.labels == ds.labels);
    CHECK(back.trial_ids == ds.trial_ids);
    CHECK(back.subject_ids == ds.subject_ids);
    CHECK(back.channel_names == ds.channel_names);
    CHECK(back.class_names == ds.class_names);
    CHECK(back.fs == ds.fs);
    CHECK(back.n_channels == ds.n_channels);
    CHECK(back.n_samples == ds.n_samples);
    CHECK(back.provenance == ds.provenance);

    // writing the same dataset twice produces byte-identical files
    const std::string stem2 = (dir / "set2").string();
    data::write_dataset(ds, stem2);
    CHECK(read_file(stem + ".json") == read_file(stem2 + ".json"));
    CHECK(read_file(stem + ".f32") == read_file(stem2 + ".f32"));
}

TEST_CASE("container rejects corruption with named diagnostics") {
    const auto dir = fresh_dir("corrupt");
    const auto ds = make_dataset(9);
    const std::string stem = (dir / "set").string();
    data::write_dataset(ds, stem);

    SUBCASE("flipped byte in the block names the block file") {
        std::string block = read_file(stem + ".f32");
        block[17] = static_cast<char>(block[17] ^ 0x01);
        write_file_atomic(stem + ".f32", block);
        CHECK_THROWS_WITH(data::read_dataset(stem), doctest::Contains("digest mismatch"));
        CHECK_THROWS_WITH(data::read_dataset(stem), doctest::Contains(".f32"));
    }

    SUBCASE("manifest claiming more epochs than the block holds") {
        auto manifest = nlohmann::json::parse(read_file(stem + ".json"));
        auto extra = manifest["epochs"].back();
        manifest["epochs"].push_back(extra); // now claims 10 over a 9-epoch block
        write_file_atomic(stem + ".json", manifest.dump(2));
        CHECK_THROWS_WITH(data::read_dataset(stem), doctest::Contains("10 epochs"));
    }

    SUBCASE("version mismatch") {
        auto manifest = nlohmann::json::parse(read_file(stem + ".json"));
        manifest["format_version"] = 2;
        write_file_atomic(stem + ".json", manifest.dump(2));
        CHECK_THROWS_WITH(data::read_dataset(stem), doctest::Contains("version mismatch"));
    }

    SUBCASE("truncated block") {
        std::string block = read_file(stem + ".f32");
        block.resize(block.size() - 4);
        write_file_atomic(stem + ".f32", block);
        CHECK_THROWS(data::read_dataset(stem));
    }
}

TEST_CASE("select_channels subsets, reorders, and is idempotent") {
    const auto ds = make_dataset(5, 6, 20);
    const std::vector<std::string> want{"ch4", "ch1"};
    const auto sub = data::select_channels(ds, want);
    CHECK(sub.n_channels == 2);
    CHECK(sub.channel_names == want);
    for (std::size_t e = 0; e < 5; ++e) {
        for (std::size_t t = 0; t < 20; ++t) {
            CHECK(sub.channel(e, 0)[t] == ds.channel(e, 4)[t]);
            CHECK(sub.channel(e, 1)[t] == ds.channel(e, 1)[t]);
        }
    }
    const auto again = data::select_channels(sub, want);
    CHECK(again.data == sub.data);
    CHECK(again.channel_names == sub.channel_names);

    CHECK_THROWS_WITH(data::select_channels(ds, {"ch1", "Qz"}), doctest::Contains("Qz"));
}

namespace {

void write_epoch_csv(const fs::path& p, const std::vector<std::string>& channels,
                     std::size_t rows, float base) {
    std::ofstream f(p);
    for (std::size_t c = 0; c < channels.size(); ++c) f << (c ? "," : "") << channels[c];
    f << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < channels.size(); ++c) {
            f << (c ? "," : "") << (base + static_cast<float>(r) + 0.25f * static_cast<float>(c));
        }
        f << "\n";
    }
}

} // namespace

TEST_CASE("import_csv happy path and errors") {
    const auto dir = fresh_dir("import");
    const std::vector<std::string> chans{"C3", "Cz", "C4"};
    write_epoch_csv(dir / "e0.csv", chans, 5, 0.f);
    write_epoch_csv(dir / "e1.csv", chans, 5, 10.f);
    write_epoch_csv(dir / "e2.csv", chans, 5, 20.f);
    write_epoch_csv(dir / "e3.csv", chans, 5, 30.f);
    {
        std::ofstream f(dir / "index.csv");
        f << "filename,label\n"
          << "e0.csv,left\ne1.csv,right\ne2.csv,left\ne3.csv,right\n";
    }
    const std::map<std::string, int> cmap{{"left", 0}, {"right", 1}};
    std::string warning;
    const auto ds = data::import_csv(dir.string(), 250.0, cmap, {"left", "right"}, &warning);
    CHECK(ds.n_epochs() == 4);
    CHECK(ds.n_channels == 3);
    CHECK(ds.n_samples == 5);
    CHECK(ds.labels == std::vector<int>{0, 1, 0, 1});
    CHECK(ds.channel(0, 1)[2] == doctest::Approx(2.25f)); // row 2, channel 1 of e0
    CHECK(!warning.empty()); // 3 channels is not the montage

    SUBCASE("non-numeric cell reports file, row, column") {
        std::ofstream f(dir / "e1.csv", std::ios::app);
        f << "1.0,oops,3.0\n";
        f.close();
        CHECK_THROWS_WITH(data::import_csv(dir.string(), 250.0, cmap, {"left", "right"}, nullptr),
                          doctest::Contains("e1.csv"));
        try {
            data::import_csv(dir.string(), 250.0, cmap, {"left", "right"}, nullptr);
        } catch (const std::exception& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 7") != std::string::npos);
            CHECK(msg.find("column 2") != std::string::npos);
        }
    }

    SUBCASE("ragged row is rejected") {
        std::ofstream f(dir / "e2.csv", std::ios::app);
        f << "1.0,2.0\n";
        f.close();
        CHECK_THROWS_WITH(data::import_csv(dir.string(), 250.0, cmap, {"left", "right"}, nullptr),
                          doctest::Contains("cells"));
    }

    SUBCASE("unknown label is rejected") {
        std::ofstream f(dir / "index.csv", std::ios::app);
        f << "e0.csv,huh\n";
        f.close();
        CHECK_THROWS_WITH(data::import_csv(dir.string(), 250.0, cmap, {"left", "right"}, nullptr),
                          doctest::Contains("huh"));
    }

    SUBCASE("missing index.csv") {
        const auto empty = fresh_dir("import_empty");
        CHECK_THROWS_WITH(data::import_csv(empty.string(), 250.0, cmap, {"left", "right"}, nullptr),
                          doctest::Contains("index.csv"));
    }
}

TEST_CASE("import_csv reorders a full montage set") {
    const auto dir = fresh_dir("import_montage");
    // write channels in scrambled order: reversed montage
    auto scrambled = data::channel_montage();
    std::reverse(scrambled.begin(), scrambled.end());
    write_epoch_csv(dir / "a.csv", scrambled, 6, 0.f);
    write_epoch_csv(dir / "b.csv", scrambled, 6, 5.f);
    {
        std::ofstream f(dir / "index.csv");
        f << "a.csv,rest\nb.csv,rest\n";
    }
    std::string warning;
    const auto ds = data::import_csv(dir.string(), 250.0, {{"rest", 0}}, {"rest"}, &warning);
    CHECK(warning.empty());
    CHECK(ds.channel_names == data::channel_montage());
    // column j of the file is channel montage[23-j]; spot-check F3 (was last column)
    CHECK(ds.channel(0, 0)[0] == doctest::Approx(0.25f * 23.0f));
}
