#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "ndg/io.hpp"

using namespace ndg;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("ndg_io_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}
}  // namespace

TEST_CASE("pfm round trips are bit-exact for 1 and 3 channels") {
    TempDir td;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(-100.0f, 100.0f);
    for (int trial = 0; trial < 100; ++trial) {
        PfmImage img;
        img.width = 1 + int(rng() % 9);
        img.height = 1 + int(rng() % 9);
        img.channels = (trial % 2) ? 3 : 1;
        img.data.resize(size_t(img.width) * img.height * img.channels);
        for (auto& v : img.data) v = u(rng);
        auto p = td / "img.pfm";
        write_pfm(img, p);
        PfmImage back = read_pfm(p);
        CHECK(back.width == img.width);
        CHECK(back.height == img.height);
        CHECK(back.channels == img.channels);
        REQUIRE(back.data.size() == img.data.size());
        CHECK(std::memcmp(back.data.data(), img.data.data(), img.data.size() * 4) == 0);
    }
}

TEST_CASE("hand-assembled little-endian pfm fixture decodes correctly") {
    TempDir td;
    // 2x2 single channel, bottom-up rows: file row 0 is the image's bottom row.
    std::string header = "Pf\n2 2\n-1.0\n";
    float bottom[2] = {3.0f, 4.0f}, top[2] = {1.0f, 2.0f};
    std::string payload(reinterpret_cast<char*>(bottom), 8);
    payload.append(reinterpret_cast<char*>(top), 8);
    auto p = td / "hand.pfm";
    write_bytes(p, header + payload);
    PfmImage img = read_pfm(p);
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    REQUIRE(img.channels == 1);
    // Top-down in memory.
    CHECK(img.data[0] == 1.0f);
    CHECK(img.data[1] == 2.0f);
    CHECK(img.data[2] == 3.0f);
    CHECK(img.data[3] == 4.0f);
}

TEST_CASE("truncated and malformed pfm files raise errors") {
    TempDir td;
    auto p = td / "bad.pfm";
    write_bytes(p, "Pf\n2 2\n-1.0\nshort");
    CHECK_THROWS(read_pfm(p));
    write_bytes(p, "P6\n2 2\n-1.0\n0123456789abcdef");
    CHECK_THROWS(read_pfm(p));
    write_bytes(p, "Pf\n0 2\n-1.0\n");
    CHECK_THROWS(read_pfm(p));
    CHECK_THROWS_AS(read_pfm(td / "missing.pfm"), std::invalid_argument);
}

TEST_CASE("depth map pfm conversion marks non-positive pixels invalid") {
    DepthMap d(3, 1);
    d.set(0, 0, 2.5);
    d.set(2, 0, 7.0);  // middle pixel stays invalid
    PfmImage img = pfm_from_depthmap(d);
    CHECK(img.data[1] == 0.0f);
    DepthMap back = depthmap_from_pfm(img);
    CHECK(back.is_valid(0, 0));
    CHECK_FALSE(back.is_valid(1, 0));
    CHECK(back.at(2, 0) == doctest::Approx(7.0));
}

TEST_CASE("normal map pfm conversion preserves all three components") {
    NormalMap n(2, 2);
    n.set(0, 0, Vec3{0.0, 0.0, 1.0});
    n.set(1, 1, Vec3{0.6, 0.0, 0.8});
    PfmImage img = pfm_from_normalmap(n);
    CHECK(img.channels == 3);
    NormalMap back = normalmap_from_pfm(img);
    CHECK(back.at(1, 1).x == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(back.at(1, 1).z == doctest::Approx(0.8).epsilon(1e-7));
}

TEST_CASE("pgm round trips and rejects bad headers") {
    TempDir td;
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        Grid<uint16_t> g(1 + int(rng() % 8), 1 + int(rng() % 8), 0);
        int maxval = (trial % 2) ? 65535 : 255;
        for (auto& v : g.v) v = uint16_t(rng() % (maxval + 1));
        auto p = td / "img.pgm";
        write_pgm(g, maxval, p);
        int maxval_back = 0;
        Grid<uint16_t> back = read_pgm(p, &maxval_back);
        CHECK(maxval_back == maxval);
        CHECK(back.width == g.width);
        CHECK(back.height == g.height);
        CHECK(back.v == g.v);
    }
    auto p = td / "bad.pgm";
    write_bytes(p, "P2\n2 2\n255\n0 0 0 0\n");  // ascii pgm unsupported
    CHECK_THROWS(read_pgm(p));
    write_bytes(p, "P5\n2 2\n255\nab");  // truncated
    CHECK_THROWS(read_pgm(p));
}

TEST_CASE("label images refuse ids beyond 16 bits") {
    TempDir td;
    std::vector<int> labels = {0, 1, 2, 70000};
    CHECK_THROWS_AS(write_labels_pgm(labels, 2, 2, td / "l.pgm"), std::invalid_argument);
    labels[3] = 3;
    write_labels_pgm(labels, 2, 2, td / "l.pgm");
    auto back = read_pgm(td / "l.pgm");
    CHECK(back.v == std::vector<uint16_t>({0, 1, 2, 3}));
}

TEST_CASE("mask pgm stores 0/255 bytes") {
    TempDir td;
    std::vector<uint8_t> mask = {0, 255, 255, 0};
    write_mask_pgm(mask, 2, 2, td / "m.pgm");
    int maxval = 0;
    auto back = read_pgm(td / "m.pgm", &maxval);
    CHECK(maxval == 255);
    CHECK(back.v == std::vector<uint16_t>({0, 255, 255, 0}));
}

TEST_CASE("ply round trips in both encodings") {
    TempDir td;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-5.0f, 5.0f);
    for (int trial = 0; trial < 50; ++trial) {
        PointCloud pc;
        size_t n = 1 + rng() % 40;
        bool with_color = trial % 2;
        for (size_t i = 0; i < n; ++i) {
            pc.points.push_back({u(rng), u(rng), u(rng)});
            if (with_color) pc.colors.push_back({uint8_t(rng() % 256), uint8_t(rng() % 256), uint8_t(rng() % 256)});
        }
        for (bool binary : {false, true}) {
            auto p = td / "c.ply";
            write_ply(pc, p, binary);
            PointCloud back = read_ply(p);
            REQUIRE(back.size() == pc.size());
            for (size_t i = 0; i < n; ++i) {
                // Stored as float32; compare at float precision.
                CHECK(float(back.points[i].x) == doctest::Approx(float(pc.points[i].x)).epsilon(1e-6));
                CHECK(float(back.points[i].z) == doctest::Approx(float(pc.points[i].z)).epsilon(1e-6));
            }
            if (with_color) {
                REQUIRE(back.colors.size() == n);
                CHECK(back.colors.back()[0] == pc.colors.back()[0]);
                CHECK(back.colors.back()[2] == pc.colors.back()[2]);
            }
        }
    }
}

TEST_CASE("tensor container round trips names, dims and payloads exactly") {
    TempDir td;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<NamedTensor> ts;
        size_t count = 1 + rng() % 5;
        for (size_t i = 0; i < count; ++i) {
            NamedTensor t;
            t.name = "tensor_" + std::to_string(trial) + "_" + std::to_string(i);
            size_t rank = 1 + rng() % 3;
            size_t total = 1;
            for (size_t r = 0; r < rank; ++r) {
                uint32_t d = 1 + uint32_t(rng() % 4);
                t.dims.push_back(d);
                total *= d;
            }
            for (size_t j = 0; j < total; ++j) t.data.push_back(u(rng));
            ts.push_back(std::move(t));
        }
        auto p = td / "w.ndgw";
        write_tensor_container(ts, p);
        auto back = read_tensor_container(p);
        REQUIRE(back.size() == ts.size());
        for (size_t i = 0; i < ts.size(); ++i) {
            CHECK(back[i].name == ts[i].name);
            CHECK(back[i].dims == ts[i].dims);
            CHECK(back[i].data == ts[i].data);  // bit-exact doubles
        }
    }
}

TEST_CASE("tensor container rejects bad magic and truncation") {
    TempDir td;
    auto p = td / "w.ndgw";
    write_tensor_container({{"a", {2}, {1.0, 2.0}}}, p);
    std::ifstream in(p, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    auto bad = bytes;
    bad[0] = 'X';
    write_bytes(p, bad);
    CHECK_THROWS(read_tensor_container(p));
    write_bytes(p, bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS(read_tensor_container(p));
}

TEST_CASE("intrinsics sidecar round trips at full precision") {
    TempDir td;
    Intrinsics k{518.8579, 519.46961, 325.58245, 253.73617};
    auto p = td / "k.txt";
    write_intrinsics(k, p);
    Intrinsics back = read_intrinsics(p);
    CHECK(back.fx == doctest::Approx(k.fx).epsilon(1e-15));
    CHECK(back.fy == doctest::Approx(k.fy).epsilon(1e-15));
    CHECK(back.cx == doctest::Approx(k.cx).epsilon(1e-15));
    CHECK(back.cy == doctest::Approx(k.cy).epsilon(1e-15));
    write_bytes(p, "518.8\n519.4\n");
    CHECK_THROWS(read_intrinsics(p));
}

TEST_CASE("atomic_write leaves no temp files and replaces content") {
    TempDir td;
    auto p = td / "out.txt";
    atomic_write(p, "first");
    atomic_write(p, "second");
    std::ifstream in(p);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(s == "second");
    size_t entries = 0;
    for ([[maybe_unused]] auto& e : fs::directory_iterator(td.dir)) ++entries;
    CHECK(entries == 1);
}
