#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "scin/data.hpp"
#include "scin/image_io.hpp"
#include "scin/logging.hpp"

using namespace scin;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("scin_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream(p) << s;
}

ImageRecord image(std::string id, Sensor s, std::size_t h = 64, std::size_t w = 64, float fill = 0.5f) {
    return {std::move(id), Tensor({3, h, w}, fill), device_of(s), s};
}

std::vector<ImageRecord> balanced(std::size_t per_sensor, std::size_t sensors = sensor_count) {
    std::vector<ImageRecord> out;
    for (std::size_t s = 0; s < sensors; ++s) {
        for (std::size_t i = 0; i < per_sensor; ++i) {
            out.push_back(image("s" + std::to_string(s) + "_" + std::to_string(i), Sensor(s), 32, 32));
        }
    }
    return out;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no scin::Error thrown";
    return ErrorKind::io;
}

}  // namespace

TEST(Labels, TokensAndConsistency) {
    EXPECT_EQ(device_of(Sensor::SG4_B), Device::SG4);
    EXPECT_EQ(device_of(Sensor::SGT2_F), Device::SGT2);
    EXPECT_EQ(class_names(LabelMode::model_level), (std::vector<std::string>{"IP5", "SG4", "SGT2"}));
    EXPECT_EQ(class_names(LabelMode::sensor_level),
              (std::vector<std::string>{"IP5_F", "IP5_B", "SG4_F", "SG4_B", "SGT2_F"}));
    EXPECT_EQ(parse_sensor("SG4_B"), Sensor::SG4_B);
    EXPECT_FALSE(parse_sensor("SGT2_B").has_value());
}

TEST(ImageIo, PngAndPpmRoundTrip) {
    TempDir dir;
    Rng rng(1);
    Tensor img = rng_uniform<float>(rng, {3, 5, 7}, 0.0, 1.0);
    for (auto& v : img.data()) v = std::round(v * 255.0f) / 255.0f;
    write_png(dir.path() / "a.png", img);
    write_ppm(dir.path() / "a.ppm", img);
    for (const char* name : {"a.png", "a.ppm"}) {
        const Tensor back = read_image(dir.path() / name);
        ASSERT_EQ(back.shape(), img.shape());
        for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back[i], img[i], 1e-6) << name;
    }
    EXPECT_EQ(detect_image_format(dir.path() / "a.png"), ImageFormat::png);
}

TEST(ImageIo, JpegRejectedByDefault) {
    TempDir dir;
    const std::uint8_t soi[] = {0xff, 0xd8, 0xff, 0xe0, 0, 0};
    std::ofstream(dir.path() / "x.jpg", std::ios::binary).write(reinterpret_cast<const char*>(soi), sizeof soi);
    EXPECT_EQ(kind_of([&] { read_image(dir.path() / "x.jpg"); }), ErrorKind::ingest);
}

TEST(Manifest, ParsesRowsAndResolvesPaths) {
    TempDir dir;
    write_png(dir.path() / "img1.png", Tensor({3, 32, 32}, 0.25f));
    write_text(dir.path() / "m.csv", "path,device,sensor\nimg1.png,IP5,IP5_F\n");
    const auto records = load_manifest(dir.path() / "m.csv");
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].image_id, "img1.png");
    EXPECT_EQ(records[0].device, Device::IP5);
    EXPECT_EQ(records[0].sensor, Sensor::IP5_F);
    EXPECT_NEAR(records[0].pixels[0], 64.0 / 255.0, 1e-6);
}

TEST(Manifest, InconsistentOrUnknownLabelsNameTheRow) {
    TempDir dir;
    write_text(dir.path() / "m.csv", "path,device,sensor\na.png,IP5,IP5_F\nb.png,SGT2,SG4_B\n");
    try {
        parse_manifest(dir.path() / "m.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::manifest);
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
    }
    write_text(dir.path() / "u.csv", "path,device,sensor\na.png,NOKIA,IP5_F\n");
    EXPECT_EQ(kind_of([&] { parse_manifest(dir.path() / "u.csv"); }), ErrorKind::manifest);
    write_text(dir.path() / "h.csv", "file,label\n");
    EXPECT_EQ(kind_of([&] { parse_manifest(dir.path() / "h.csv"); }), ErrorKind::manifest);
}

TEST(Manifest, EmptyManifestWarns) {
    TempDir dir;
    write_text(dir.path() / "m.csv", "path,device,sensor\n");
    std::vector<std::string> warnings;
    auto prev = set_log_sink([&](LogLevel l, std::string_view m) {
        if (l == LogLevel::warning) warnings.emplace_back(m);
    });
    const auto records = load_manifest(dir.path() / "m.csv");
    set_log_sink(prev);
    EXPECT_TRUE(records.empty());
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(Manifest, UnreadableImageIsIngestErrorWithPath) {
    TempDir dir;
    write_text(dir.path() / "m.csv", "path,device,sensor\nmissing.png,IP5,IP5_F\n");
    try {
        load_manifest(dir.path() / "m.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ingest);
        EXPECT_NE(std::string(e.what()).find("missing.png"), std::string::npos);
    }
    EXPECT_EQ(kind_of([&] { load_manifest(dir.path() / "none.csv"); }), ErrorKind::ingest);
}

TEST(Manifest, WriteThenParse) {
    TempDir dir;
    const std::vector<ManifestRow> rows{{"a.png", Device::SG4, Sensor::SG4_B}, {"b.png", Device::SGT2, Sensor::SGT2_F}};
    write_manifest(dir.path() / "m.csv", rows);
    const auto back = parse_manifest(dir.path() / "m.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].sensor, Sensor::SGT2_F);
    EXPECT_EQ(back[0].path, "a.png");
}

TEST(Patches, CountsAndIdentityTile) {
    EXPECT_EQ(extract_patches(image("big", Sensor::IP5_F, 512, 512), LabelMode::model_level).size(), 256u);
    EXPECT_EQ(extract_patches(image("huge", Sensor::IP5_F, 600, 800), LabelMode::model_level).size(), 256u);
    EXPECT_EQ(extract_patches(image("small", Sensor::IP5_F, 64, 64), LabelMode::model_level).size(), 4u);
    EXPECT_EQ(extract_patches(image("odd", Sensor::IP5_F, 100, 70), LabelMode::model_level).size(), 6u);

    Rng rng(2);
    ImageRecord one{"one", rng_uniform<float>(rng, {3, 32, 32}, 0, 1), Device::SG4, Sensor::SG4_F};
    const auto p = extract_patches(one, LabelMode::sensor_level);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].pixels, one.pixels);
    EXPECT_EQ(p[0].label, 2u);
    EXPECT_EQ(p[0].source_image_id, "one");

    EXPECT_EQ(kind_of([] { extract_patches(image("tiny", Sensor::IP5_F, 31, 64), LabelMode::model_level); }),
              ErrorKind::too_small);
}

TEST(Patches, DisjointAndCentred) {
    const auto patches = extract_patches(image("x", Sensor::IP5_F, 600, 560), LabelMode::model_level);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : patches) {
        for (std::size_t y = 0; y < patch_size; ++y) {
            for (std::size_t x = 0; x < patch_size; ++x) ASSERT_TRUE(seen.insert({p.row + y, p.col + x}).second);
        }
    }
    EXPECT_EQ(seen.size(), 512u * 512);
    EXPECT_EQ(patches.front().row, 44u);
    EXPECT_EQ(patches.front().col, 24u);
}

TEST(Split, PartitionProperties) {
    const auto records = balanced(20);  // 100 images
    Rng rng(3);
    const auto a = split_by_image(records, 10, rng);
    std::vector<std::size_t> seen(records.size(), 0);
    for (std::size_t k = 0; k < 10; ++k) {
        const auto test = a.test_indices(k);
        EXPECT_EQ(test.size(), 10u);
        for (auto i : test) ++seen[i];
        const auto train = a.train_indices(k);
        EXPECT_EQ(train.size() + test.size(), records.size());
    }
    for (auto s : seen) EXPECT_EQ(s, 1u);

    Rng again(3);
    EXPECT_EQ(split_by_image(records, 10, again).fold_of, a.fold_of);
    EXPECT_EQ(split_by_image(records, 10, again).fold_of == a.fold_of, false);
}

TEST(Split, StratifiedWithinOneImage) {
    std::vector<ImageRecord> records;
    const std::size_t counts[] = {23, 17, 31, 12, 40};
    for (std::size_t s = 0; s < sensor_count; ++s) {
        for (std::size_t i = 0; i < counts[s]; ++i) {
            records.push_back(image("s" + std::to_string(s) + "_" + std::to_string(i), Sensor(s), 32, 32));
        }
    }
    Rng rng(4);
    const auto a = split_by_image(records, 10, rng);
    for (std::size_t k = 0; k < 10; ++k) {
        std::map<Sensor, std::size_t> per;
        for (auto i : a.test_indices(k)) ++per[records[i].sensor];
        for (std::size_t s = 0; s < sensor_count; ++s) {
            const double expected = counts[s] / 10.0;
            EXPECT_LE(std::abs(double(per[Sensor(s)]) - expected), 1.0) << "fold " << k << " sensor " << s;
        }
    }
}

TEST(Split, NoImageStraddlesTrainAndTest) {
    auto records = balanced(12);
    for (auto& r : records) r.pixels = Tensor({3, 64, 96}, 0.3f);
    Rng rng(5);
    const auto a = split_by_image(records, 10, rng);
    for (LabelMode mode : {LabelMode::model_level, LabelMode::sensor_level}) {
        for (std::size_t k = 0; k < 10; ++k) {
            const auto tr = a.train_indices(k), te = a.test_indices(k);
            const auto train = make_dataset(records, tr, mode);
            const auto test = make_dataset(records, te, mode);
            std::set<std::string> train_ids;
            for (const auto& p : train.patches) train_ids.insert(p.source_image_id);
            for (const auto& p : test.patches) ASSERT_EQ(train_ids.count(p.source_image_id), 0u);
            EXPECT_EQ(train.size() + test.size(), records.size() * 6);
            for (const auto& p : test.patches) EXPECT_LT(p.label, num_classes(mode));
        }
    }
}

TEST(Split, TooFewImagesIsStratificationError) {
    auto records = balanced(10);
    records.pop_back();
    Rng rng(6);
    EXPECT_EQ(kind_of([&] { split_by_image(records, 10, rng); }), ErrorKind::stratification);
}

TEST(Normalize, TrainMeanRemoval) {
    std::vector<ImageRecord> train{image("a", Sensor::IP5_F, 32, 32, 0.5f), image("b", Sensor::SG4_F, 32, 32, 0.5f)};
    const std::vector<std::size_t> idx{0, 1};
    auto ds = make_dataset(train, idx, LabelMode::model_level);
    const auto stats = compute_channel_stats(ds);
    for (double m : stats.mean) EXPECT_NEAR(m, 0.5, 1e-9);
    const auto norm = normalize(ds, stats);
    for (const auto& p : norm.patches) {
        for (float v : p.pixels.data()) EXPECT_EQ(v, 0.0f);
    }

    std::vector<ImageRecord> test{image("t", Sensor::IP5_F, 32, 32, 0.8f)};
    const std::vector<std::size_t> one{0};
    const auto t = normalize(make_dataset(test, one, LabelMode::model_level), stats);
    EXPECT_NEAR(t.patches[0].pixels[0], 0.3, 1e-6);
    const auto twice = normalize(t, stats);
    EXPECT_NEAR(twice.patches[0].pixels[0], -0.2, 1e-6);
}

TEST(MajorityVote, CountsImagesNotPatches) {
    std::vector<ImageRecord> records{image("a", Sensor::IP5_F), image("b", Sensor::SG4_F)};
    const std::vector<std::size_t> idx{0, 1};
    const auto ds = make_dataset(records, idx, LabelMode::model_level);
    ASSERT_EQ(ds.size(), 8u);
    // image a: 3 of 4 patches right; image b: 2-2 tie broken to the lower class (0, wrong).
    const std::vector<std::size_t> preds{0, 0, 0, 2, 1, 1, 0, 0};
    EXPECT_DOUBLE_EQ(majority_vote_accuracy(ds, preds), 0.5);
}
