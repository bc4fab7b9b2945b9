#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "ttwopt/io.hpp"
#include "ttwopt/tensor.hpp"

using namespace ttwopt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ttwopt-io-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

DenseTensor random_tensor(const Shape& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    DenseTensor t(shape);
    for (auto& v : t.values()) v = dist(rng);
    return t;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream os(p, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("tensor file round-trips bit-exactly") {
    TempDir dir;
    DenseTensor t = random_tensor(Shape{2, 3, 4}, 1);
    const fs::path p = dir.path / "t.dten";
    write_tensor(p, t);
    DenseTensor back = read_tensor(p);
    CHECK(back.shape() == t.shape());
    CHECK(back.values() == t.values());
    CHECK(!fs::exists(dir.path / "t.dten.tmp"));
}

TEST_CASE("tensor file rejects a bad magic") {
    TempDir dir;
    const fs::path p = dir.path / "bad.dten";
    write_bytes(p, std::string("XXXX1") + std::string(32, '\0'));
    CHECK_THROWS_WITH_AS(read_tensor(p), doctest::Contains("bad magic"), std::runtime_error);
}

TEST_CASE("tensor file detects a truncated payload") {
    TempDir dir;
    const fs::path p = dir.path / "short.dten";
    // header says (2,3) so the payload must be 48 bytes; provide 40
    std::string bytes = "DTEN1";
    auto put_u32 = [&bytes](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    put_u32(2);
    put_u32(2);
    put_u32(3);
    bytes += std::string(40, '\x01');
    write_bytes(p, bytes);
    CHECK_THROWS_WITH_AS(read_tensor(p), doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("tensor write rejects non-finite values and leaves nothing behind") {
    TempDir dir;
    DenseTensor t(Shape{2}, {1.0, std::numeric_limits<double>::quiet_NaN()});
    const fs::path p = dir.path / "nan.dten";
    CHECK_THROWS(write_tensor(p, t));
    CHECK(!fs::exists(p));

    t[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS(write_tensor(p, t));
    CHECK(!fs::exists(p));
}

TEST_CASE("ppm: 1x1 white pixel") {
    TempDir dir;
    const fs::path p = dir.path / "white.ppm";
    write_bytes(p, std::string("P6\n1 1\n255\n") + "\xFF\xFF\xFF");
    DenseTensor t = read_ppm(p);
    CHECK(t.shape() == Shape{1, 1, 3});
    CHECK(t.values() == std::vector<double>{255.0, 255.0, 255.0});
}

TEST_CASE("ppm: header comments and whitespace are tolerated") {
    TempDir dir;
    const fs::path p = dir.path / "comment.ppm";
    write_bytes(p, std::string("P6\n# a comment\n2 1\n# another\n255\n") + std::string(6, '\x10'));
    DenseTensor t = read_ppm(p);
    CHECK(t.shape() == Shape{1, 2, 3});
    for (index_t i = 0; i < t.size(); ++i) CHECK(t[i] == 16.0);
}

TEST_CASE("ppm round-trips byte-exactly") {
    TempDir dir;
    DenseTensor img(Shape{4, 6, 3});
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dist(0, 255);
    for (auto& v : img.values()) v = static_cast<double>(dist(rng));

    const fs::path a = dir.path / "a.ppm";
    const fs::path b = dir.path / "b.ppm";
    write_ppm(a, img);
    DenseTensor back = read_ppm(a);
    CHECK(back.values() == img.values());
    write_ppm(b, back);

    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ca == cb);
}

TEST_CASE("ppm write clamps and rounds") {
    TempDir dir;
    DenseTensor img(Shape{1, 2, 3}, {255.6, -3.0, 127.5, 10.4, 0.0, 254.5});
    const fs::path p = dir.path / "clamp.ppm";
    write_ppm(p, img);
    DenseTensor back = read_ppm(p);
    CHECK(back.values() == std::vector<double>{255.0, 0.0, 128.0, 10.0, 0.0, 255.0});
}

TEST_CASE("ppm rejects wrong formats") {
    TempDir dir;
    const fs::path p5 = dir.path / "gray.pgm";
    write_bytes(p5, "P5\n1 1\n255\n\xFF");
    CHECK_THROWS(read_ppm(p5));

    const fs::path maxed = dir.path / "hdr.ppm";
    write_bytes(maxed, std::string("P6\n1 1\n65535\n") + std::string(6, '\x01'));
    CHECK_THROWS(read_ppm(maxed));

    const fs::path trunc = dir.path / "trunc.ppm";
    write_bytes(trunc, std::string("P6\n2 2\n255\n") + std::string(5, '\x01'));
    CHECK_THROWS(read_ppm(trunc));

    CHECK_THROWS(write_ppm(dir.path / "bad.ppm", DenseTensor(Shape{2, 2, 1})));
}

TEST_CASE("write_text is atomic") {
    TempDir dir;
    const fs::path p = dir.path / "trace.csv";
    write_text(p, "iter,f\n1,0.5\n");
    std::ifstream is(p);
    std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(content == "iter,f\n1,0.5\n");
    CHECK(!fs::exists(dir.path / "trace.csv.tmp"));
}
