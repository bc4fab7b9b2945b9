#include "ttwopt/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ttwopt {

namespace {

constexpr char kMagic[5] = {'D', 'T', 'E', 'N', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::istream& is, std::uint32_t& v) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

// Stages output in "<path>.tmp"; rename on commit, unlink otherwise.
class AtomicFile {
public:
    explicit AtomicFile(const std::filesystem::path& path)
        : final_(path), tmp_(path.string() + ".tmp"), os_(tmp_, std::ios::binary | std::ios::trunc) {
        if (!os_) throw std::runtime_error("cannot open " + tmp_.string() + " for writing");
    }
    ~AtomicFile() {
        if (!committed_) {
            os_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }
    std::ostream& stream() { return os_; }
    void commit() {
        os_.flush();
        if (!os_) throw std::runtime_error("write failed for " + tmp_.string());
        os_.close();
        std::filesystem::rename(tmp_, final_);
        committed_ = true;
    }

private:
    std::filesystem::path final_;
    std::filesystem::path tmp_;
    std::ofstream os_;
    bool committed_ = false;
};

}  // namespace

void write_tensor(const std::filesystem::path& path, const DenseTensor& t) {
    for (index_t i = 0, n = t.size(); i < n; ++i)
        if (!std::isfinite(t[i]))
            throw std::invalid_argument("write_tensor: tensor contains non-finite values");
    if (t.order() > 0xFFFF) throw std::invalid_argument("write_tensor: too many modes");

    AtomicFile file(path);
    std::ostream& os = file.stream();
    os.write(kMagic, sizeof(kMagic));
    put_u32(os, static_cast<std::uint32_t>(t.order()));
    for (index_t d : t.shape().dims()) {
        if (d > 0xFFFFFFFFll) throw std::invalid_argument("write_tensor: dim exceeds u32");
        put_u32(os, static_cast<std::uint32_t>(d));
    }
    static_assert(std::endian::native == std::endian::little,
                  "payload serialization assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * static_cast<index_t>(sizeof(double))));
    file.commit();
}

DenseTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[5];
    if (!is.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0)
        throw std::runtime_error(path.string() + ": bad magic, not a DTEN1 file");
    std::uint32_t order = 0;
    if (!get_u32(is, order) || order == 0)
        throw std::runtime_error(path.string() + ": bad header");
    std::vector<index_t> dims(order);
    for (auto& d : dims) {
        std::uint32_t v = 0;
        if (!get_u32(is, v) || v == 0) throw std::runtime_error(path.string() + ": bad header");
        d = static_cast<index_t>(v);
    }
    Shape shape(dims);
    std::vector<double> values(static_cast<std::size_t>(shape.count()));
    const std::streamsize bytes =
        static_cast<std::streamsize>(shape.count() * static_cast<index_t>(sizeof(double)));
    if (!is.read(reinterpret_cast<char*>(values.data()), bytes))
        throw std::runtime_error(path.string() + ": truncated payload, expected " +
                                 std::to_string(bytes) + " bytes");
    return DenseTensor(std::move(shape), std::move(values));
}

namespace {

// PPM header token reader: skips whitespace and '#' comments.
std::string ppm_token(std::istream& is) {
    std::string tok;
    int c = is.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = is.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = is.get();
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = is.get();
    }
    return tok;
}

}  // namespace

DenseTensor read_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    if (ppm_token(is) != "P6") throw std::runtime_error(path.string() + ": not a binary PPM (P6)");
    const std::string ws = ppm_token(is), hs = ppm_token(is), ms = ppm_token(is);
    index_t width = 0, height = 0, maxval = 0;
    try {
        width = std::stoll(ws);
        height = std::stoll(hs);
        maxval = std::stoll(ms);
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": malformed PPM header");
    }
    if (width < 1 || height < 1) throw std::runtime_error(path.string() + ": bad PPM dimensions");
    if (maxval != 255) throw std::runtime_error(path.string() + ": PPM maxval must be 255");

    std::vector<unsigned char> raster(static_cast<std::size_t>(width * height * 3));
    if (!is.read(reinterpret_cast<char*>(raster.data()),
                 static_cast<std::streamsize>(raster.size())))
        throw std::runtime_error(path.string() + ": truncated PPM raster");

    DenseTensor t(Shape{height, width, 3});
    double* out = t.data();
    const unsigned char* in = raster.data();
    for (index_t r = 0; r < height; ++r)
        for (index_t c = 0; c < width; ++c)
            for (index_t ch = 0; ch < 3; ++ch)
                out[r + height * (c + width * ch)] =
                    static_cast<double>(in[(r * width + c) * 3 + ch]);
    return t;
}

void write_ppm(const std::filesystem::path& path, const DenseTensor& t) {
    if (t.order() != 3 || t.shape().dim(3) != 3)
        throw std::invalid_argument("write_ppm: tensor must be H x W x 3, got " +
                                    t.shape().str());
    const index_t height = t.shape().dim(1);
    const index_t width = t.shape().dim(2);

    std::vector<unsigned char> raster(static_cast<std::size_t>(width * height * 3));
    const double* in = t.data();
    for (index_t r = 0; r < height; ++r)
        for (index_t c = 0; c < width; ++c)
            for (index_t ch = 0; ch < 3; ++ch) {
                double v = in[r + height * (c + width * ch)];
                v = std::isfinite(v) ? std::round(v) : 0.0;
                if (v < 0.0) v = 0.0;
                if (v > 255.0) v = 255.0;
                raster[static_cast<std::size_t>((r * width + c) * 3 + ch)] =
                    static_cast<unsigned char>(v);
            }

    AtomicFile file(path);
    std::ostream& os = file.stream();
    os << "P6\n" << width << " " << height << "\n255\n";
    os.write(reinterpret_cast<const char*>(raster.data()),
             static_cast<std::streamsize>(raster.size()));
    file.commit();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    AtomicFile file(path);
    file.stream() << content;
    file.commit();
}

}  // namespace ttwopt
