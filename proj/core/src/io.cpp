#include "ndg/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ndg {

namespace {

constexpr bool kHostLittle = (std::endian::native == std::endian::little);

void byteswap4(char* p) {
    std::swap(p[0], p[3]);
    std::swap(p[1], p[2]);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open for reading: " + path.string());
    return f;
}

// One whitespace-delimited token, skipping PNM '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(in.get()));
            return tok;
        }
    }
    throw std::runtime_error("unexpected end of header");
}

void finalize(const std::filesystem::path& tmp, const std::filesystem::path& path) {
    std::filesystem::rename(tmp, path);
}

}  // namespace

// --- PFM --------------------------------------------------------------------

PfmImage read_pfm(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string magic = pnm_token(f);
    PfmImage img;
    if (magic == "Pf")
        img.channels = 1;
    else if (magic == "PF")
        img.channels = 3;
    else
        throw std::runtime_error("read_pfm: bad magic '" + magic + "' in " + path.string());
    img.width = std::stoi(pnm_token(f));
    img.height = std::stoi(pnm_token(f));
    if (img.width < 1 || img.height < 1) throw std::runtime_error("read_pfm: bad dimensions");
    double scale = std::stod(pnm_token(f));
    if (scale == 0.0) throw std::runtime_error("read_pfm: zero scale");
    bool file_little = scale < 0.0;
    f.get();  // single whitespace after the scale line

    const size_t n = static_cast<size_t>(img.width) * img.height * img.channels;
    std::vector<float> raw(n);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 4));
    if (static_cast<size_t>(f.gcount()) != n * 4)
        throw std::runtime_error("read_pfm: truncated payload in " + path.string());
    if (file_little != kHostLittle)
        for (auto& v : raw) byteswap4(reinterpret_cast<char*>(&v));

    // PFM rows are stored bottom-up; flip to top-down.
    img.data.resize(n);
    const size_t row = static_cast<size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y)
        std::memcpy(&img.data[static_cast<size_t>(y) * row],
                    &raw[static_cast<size_t>(img.height - 1 - y) * row], row * 4);
    return img;
}

void write_pfm(const PfmImage& img, const std::filesystem::path& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("write_pfm: channels must be 1 or 3");
    const size_t n = static_cast<size_t>(img.width) * img.height * img.channels;
    if (img.data.size() != n) throw std::invalid_argument("write_pfm: payload size mismatch");
    auto tmp = path;
    tmp += ".tmp";
    {
        auto f = open_out(tmp);
        f << (img.channels == 1 ? "Pf" : "PF") << '\n'
          << img.width << ' ' << img.height << '\n'
          << (kHostLittle ? "-1.0" : "1.0") << '\n';
        const size_t row = static_cast<size_t>(img.width) * img.channels;
        for (int y = img.height - 1; y >= 0; --y)
            f.write(reinterpret_cast<const char*>(&img.data[static_cast<size_t>(y) * row]),
                    static_cast<std::streamsize>(row * 4));
        if (!f) throw std::runtime_error("write_pfm: write failed");
    }
    finalize(tmp, path);
}

Grid<double> grid_from_pfm(const PfmImage& img) {
    if (img.channels != 1) throw std::invalid_argument("grid_from_pfm: expected 1 channel");
    Grid<double> g(img.width, img.height);
    for (size_t i = 0; i < g.v.size(); ++i) g.v[i] = img.data[i];
    return g;
}

PfmImage pfm_from_grid(const Grid<double>& g) {
    PfmImage img;
    img.width = g.width;
    img.height = g.height;
    img.channels = 1;
    img.data.resize(g.v.size());
    for (size_t i = 0; i < g.v.size(); ++i) img.data[i] = static_cast<float>(g.v[i]);
    return img;
}

NormalMap normalmap_from_pfm(const PfmImage& img) {
    if (img.channels != 3) throw std::invalid_argument("normalmap_from_pfm: expected 3 channels");
    NormalMap n(img.width, img.height);
    for (size_t i = 0; i < n.n.size(); ++i) {
        Vec3 v{img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]};
        double len = v.norm();
        if (len > 1e-6) {
            n.n[i] = v * (1.0 / len);
            n.valid[i] = 1;
        }
    }
    return n;
}

PfmImage pfm_from_normalmap(const NormalMap& n) {
    PfmImage img;
    img.width = n.width;
    img.height = n.height;
    img.channels = 3;
    img.data.assign(n.n.size() * 3, 0.0f);
    for (size_t i = 0; i < n.n.size(); ++i) {
        if (!n.valid[i]) continue;
        img.data[3 * i] = static_cast<float>(n.n[i].x);
        img.data[3 * i + 1] = static_cast<float>(n.n[i].y);
        img.data[3 * i + 2] = static_cast<float>(n.n[i].z);
    }
    return img;
}

DepthMap depthmap_from_pfm(const PfmImage& img) {
    if (img.channels != 1) throw std::invalid_argument("depthmap_from_pfm: expected 1 channel");
    DepthMap d(img.width, img.height);
    for (size_t i = 0; i < d.z.size(); ++i)
        if (img.data[i] > 0.0f && std::isfinite(img.data[i])) {
            d.z[i] = img.data[i];
            d.valid[i] = 1;
        }
    return d;
}

PfmImage pfm_from_depthmap(const DepthMap& d) {
    PfmImage img;
    img.width = d.width;
    img.height = d.height;
    img.channels = 1;
    img.data.assign(d.z.size(), 0.0f);
    for (size_t i = 0; i < d.z.size(); ++i)
        if (d.valid[i]) img.data[i] = static_cast<float>(d.z[i]);
    return img;
}

DistanceMap distancemap_from_pfm(const PfmImage& img) {
    if (img.channels != 1) throw std::invalid_argument("distancemap_from_pfm: expected 1 channel");
    DistanceMap d(img.width, img.height);
    for (size_t i = 0; i < d.d.size(); ++i)
        if (img.data[i] > 0.0f && std::isfinite(img.data[i])) {
            d.d[i] = img.data[i];
            d.valid[i] = 1;
        }
    return d;
}

PfmImage pfm_from_distancemap(const DistanceMap& d) {
    PfmImage img;
    img.width = d.width;
    img.height = d.height;
    img.channels = 1;
    img.data.assign(d.d.size(), 0.0f);
    for (size_t i = 0; i < d.d.size(); ++i)
        if (d.valid[i]) img.data[i] = static_cast<float>(d.d[i]);
    return img;
}

// --- PGM --------------------------------------------------------------------

Grid<uint16_t> read_pgm(const std::filesystem::path& path, int* maxval_out) {
    auto f = open_in(path);
    if (pnm_token(f) != "P5") throw std::runtime_error("read_pgm: not a binary P5 PGM");
    int w = std::stoi(pnm_token(f));
    int h = std::stoi(pnm_token(f));
    int maxval = std::stoi(pnm_token(f));
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw std::runtime_error("read_pgm: bad header");
    f.get();
    if (maxval_out) *maxval_out = maxval;
    Grid<uint16_t> g(w, h);
    const size_t n = g.v.size();
    if (maxval < 256) {
        std::vector<uint8_t> raw(n);
        f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(f.gcount()) != n) throw std::runtime_error("read_pgm: truncated");
        for (size_t i = 0; i < n; ++i) g.v[i] = raw[i];
    } else {
        std::vector<uint8_t> raw(n * 2);
        f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
        if (static_cast<size_t>(f.gcount()) != n * 2) throw std::runtime_error("read_pgm: truncated");
        for (size_t i = 0; i < n; ++i)
            g.v[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);  // big-endian
    }
    return g;
}

void write_pgm(const Grid<uint16_t>& g, int maxval, const std::filesystem::path& path) {
    if (maxval != 255 && maxval != 65535)
        throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
    for (uint16_t v : g.v)
        if (v > maxval) throw std::invalid_argument("write_pgm: sample exceeds maxval");
    auto tmp = path;
    tmp += ".tmp";
    {
        auto f = open_out(tmp);
        f << "P5\n" << g.width << ' ' << g.height << '\n' << maxval << '\n';
        if (maxval < 256) {
            std::vector<uint8_t> raw(g.v.size());
            for (size_t i = 0; i < g.v.size(); ++i) raw[i] = static_cast<uint8_t>(g.v[i]);
            f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        } else {
            std::vector<uint8_t> raw(g.v.size() * 2);
            for (size_t i = 0; i < g.v.size(); ++i) {
                raw[2 * i] = static_cast<uint8_t>(g.v[i] >> 8);
                raw[2 * i + 1] = static_cast<uint8_t>(g.v[i] & 0xff);
            }
            f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        }
        if (!f) throw std::runtime_error("write_pgm: write failed");
    }
    finalize(tmp, path);
}

void write_mask_pgm(const std::vector<uint8_t>& mask, int width, int height,
                    const std::filesystem::path& path) {
    Grid<uint16_t> g(width, height);
    for (size_t i = 0; i < mask.size(); ++i) g.v[i] = mask[i] ? 255 : 0;
    write_pgm(g, 255, path);
}

void write_labels_pgm(const std::vector<int>& labels, int width, int height,
                      const std::filesystem::path& path) {
    Grid<uint16_t> g(width, height);
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] > 65535)
            throw std::invalid_argument("write_labels_pgm: label id out of 16-bit range");
        g.v[i] = static_cast<uint16_t>(labels[i]);
    }
    write_pgm(g, 65535, path);
}

// --- PLY --------------------------------------------------------------------

void write_ply(const PointCloud& cloud, const std::filesystem::path& path, bool binary) {
    if (cloud.has_colors() && cloud.colors.size() != cloud.points.size())
        throw std::invalid_argument("write_ply: color count mismatch");
    for (const auto& p : cloud.points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw std::invalid_argument("write_ply: non-finite point");
    auto tmp = path;
    tmp += ".tmp";
    {
        auto f = open_out(tmp);
        f.precision(9);  // float32 round-trips exactly through ascii
        f << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
          << "element vertex " << cloud.points.size() << '\n'
          << "property float x\nproperty float y\nproperty float z\n";
        if (cloud.has_colors())
            f << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
        f << "end_header\n";
        for (size_t i = 0; i < cloud.points.size(); ++i) {
            float xyz[3] = {static_cast<float>(cloud.points[i].x),
                            static_cast<float>(cloud.points[i].y),
                            static_cast<float>(cloud.points[i].z)};
            if (binary) {
                if (!kHostLittle)
                    for (auto& v : xyz) byteswap4(reinterpret_cast<char*>(&v));
                f.write(reinterpret_cast<const char*>(xyz), 12);
                if (cloud.has_colors())
                    f.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
            } else {
                f << xyz[0] << ' ' << xyz[1] << ' ' << xyz[2];
                if (cloud.has_colors())
                    f << ' ' << int(cloud.colors[i][0]) << ' ' << int(cloud.colors[i][1]) << ' '
                      << int(cloud.colors[i][2]);
                f << '\n';
            }
        }
        if (!f) throw std::runtime_error("write_ply: write failed");
    }
    finalize(tmp, path);
}

PointCloud read_ply(const std::filesystem::path& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line != "ply") throw std::runtime_error("read_ply: bad magic");
    bool binary = false;
    size_t count = 0;
    bool colors = false;
    std::vector<std::string> props;
    while (std::getline(f, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian")
                binary = true;
            else if (fmt != "ascii")
                throw std::runtime_error("read_ply: unsupported format " + fmt);
        } else if (tok == "element") {
            std::string what;
            ls >> what >> count;
            if (what != "vertex") throw std::runtime_error("read_ply: only vertex elements supported");
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            props.push_back(name);
        } else if (tok == "end_header") {
            break;
        }
    }
    colors = props.size() == 6;
    if (props.size() != 3 && props.size() != 6)
        throw std::runtime_error("read_ply: unsupported property layout");

    PointCloud pc;
    pc.points.resize(count);
    if (colors) pc.colors.resize(count);
    for (size_t i = 0; i < count; ++i) {
        float xyz[3];
        if (binary) {
            f.read(reinterpret_cast<char*>(xyz), 12);
            if (f.gcount() != 12) throw std::runtime_error("read_ply: truncated");
            if (!kHostLittle)
                for (auto& v : xyz) byteswap4(reinterpret_cast<char*>(&v));
            if (colors) {
                f.read(reinterpret_cast<char*>(pc.colors[i].data()), 3);
                if (f.gcount() != 3) throw std::runtime_error("read_ply: truncated");
            }
        } else {
            if (!(f >> xyz[0] >> xyz[1] >> xyz[2])) throw std::runtime_error("read_ply: truncated");
            if (colors) {
                int r, g, b;
                if (!(f >> r >> g >> b)) throw std::runtime_error("read_ply: truncated");
                pc.colors[i] = {static_cast<uint8_t>(r), static_cast<uint8_t>(g),
                                static_cast<uint8_t>(b)};
            }
        }
        pc.points[i] = {xyz[0], xyz[1], xyz[2]};
    }
    return pc;
}

// --- tensor container -------------------------------------------------------

namespace {
constexpr uint32_t kContainerVersion = 1;

void put_u32(std::ostream& f, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& f) {
    uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (f.gcount() != 4) throw std::runtime_error("tensor container: truncated");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void write_tensor_container(const std::vector<NamedTensor>& tensors,
                            const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        auto f = open_out(tmp);
        f.write("NDGW", 4);
        put_u32(f, kContainerVersion);
        put_u32(f, static_cast<uint32_t>(tensors.size()));
        for (const auto& t : tensors) {
            size_t n = 1;
            for (uint32_t d : t.dims) n *= d;
            if (n != t.data.size())
                throw std::invalid_argument("tensor container: dims do not match payload for " + t.name);
            put_u32(f, static_cast<uint32_t>(t.name.size()));
            f.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
            put_u32(f, static_cast<uint32_t>(t.dims.size()));
            for (uint32_t d : t.dims) put_u32(f, d);
            for (double v : t.data) {
                uint64_t bits;
                std::memcpy(&bits, &v, 8);
                uint8_t b[8];
                for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(bits >> (8 * i));
                f.write(reinterpret_cast<const char*>(b), 8);
            }
        }
        if (!f) throw std::runtime_error("tensor container: write failed");
    }
    finalize(tmp, path);
}

std::vector<NamedTensor> read_tensor_container(const std::filesystem::path& path) {
    auto f = open_in(path);
    char magic[4];
    f.read(magic, 4);
    if (f.gcount() != 4 || std::memcmp(magic, "NDGW", 4) != 0)
        throw std::runtime_error("tensor container: bad magic in " + path.string());
    uint32_t version = get_u32(f);
    if (version != kContainerVersion)
        throw std::runtime_error("tensor container: unsupported version " + std::to_string(version));
    uint32_t count = get_u32(f);
    std::vector<NamedTensor> out(count);
    for (auto& t : out) {
        uint32_t nl = get_u32(f);
        t.name.resize(nl);
        f.read(t.name.data(), nl);
        if (static_cast<uint32_t>(f.gcount()) != nl) throw std::runtime_error("tensor container: truncated");
        uint32_t rank = get_u32(f);
        t.dims.resize(rank);
        size_t n = 1;
        for (auto& d : t.dims) {
            d = get_u32(f);
            n *= d;
        }
        t.data.resize(n);
        for (auto& v : t.data) {
            uint8_t b[8];
            f.read(reinterpret_cast<char*>(b), 8);
            if (f.gcount() != 8) throw std::runtime_error("tensor container: truncated");
            uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
            std::memcpy(&v, &bits, 8);
        }
    }
    return out;
}

// --- intrinsics sidecar -----------------------------------------------------

Intrinsics read_intrinsics(const std::filesystem::path& path) {
    auto f = open_in(path);
    Intrinsics k;
    if (!(f >> k.fx >> k.fy >> k.cx >> k.cy))
        throw std::runtime_error("read_intrinsics: malformed file " + path.string());
    k.validate();
    return k;
}

void write_intrinsics(const Intrinsics& k, const std::filesystem::path& path) {
    std::ostringstream os;
    os.precision(17);
    os << k.fx << '\n' << k.fy << '\n' << k.cx << '\n' << k.cy << '\n';
    atomic_write(path, os.str());
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        auto f = open_out(tmp);
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!f) throw std::runtime_error("atomic_write: write failed for " + path.string());
    }
    finalize(tmp, path);
}

}  // namespace ndg
