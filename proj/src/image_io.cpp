#include "sdprop/image_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sdprop {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open for reading: " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw error("cannot open for writing: " + path);
    return f;
}

// PNM-style header token skipping whitespace and # comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!isspace(c)) {
            tok.push_back(char(c));
            while ((c = in.peek()) != EOF && !isspace(c)) {
                tok.push_back(char(in.get()));
            }
            return tok;
        }
    }
    throw error("unexpected end of header");
}

int parse_dim(const std::string& tok, const char* what) {
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(tok, &pos);
    } catch (...) {
        throw error(std::string("bad ") + what + " in header: " + tok);
    }
    if (pos != tok.size() || v < 1 || v > 1 << 20)
        throw error(std::string("bad ") + what + " in header: " + tok);
    return int(v);
}

bool host_little_endian() {
    uint16_t v = 1;
    uint8_t b;
    std::memcpy(&b, &v, 1);
    return b == 1;
}

void write_pfm_payload(std::ofstream& f, const char* magic, int w, int h, int channels,
                       const std::vector<float>& bottom_up) {
    f << magic << "\n" << w << " " << h << "\n" << "-1.0" << "\n";
    (void)channels;
    f.write(reinterpret_cast<const char*>(bottom_up.data()),
            std::streamsize(bottom_up.size() * sizeof(float)));
    if (!f)
        throw error("short PFM write");
}

std::vector<float> read_pfm_payload(std::ifstream& f, const char* magic, int channels, int& w,
                                    int& h) {
    std::string m = next_token(f);
    if (m != magic)
        throw error("PFM magic mismatch: expected " + std::string(magic) + ", got " + m);
    w = parse_dim(next_token(f), "width");
    h = parse_dim(next_token(f), "height");
    double scale = std::stod(next_token(f));
    if (scale >= 0)
        throw error("PFM: only little-endian (negative scale) files are supported");
    f.get();  // single whitespace after the scale line
    std::vector<float> buf(size_t(w) * h * channels);
    f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(float)));
    if (f.gcount() != std::streamsize(buf.size() * sizeof(float)))
        throw error("PFM payload truncated");
    return buf;
}

} // namespace

void write_pfm(const std::string& path, const DepthGrid& g) {
    if (!host_little_endian())
        throw error("PFM writer assumes a little-endian host");
    std::vector<float> buf(g.size());
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            buf[size_t(g.height - 1 - y) * g.width + x] = float(g.at(x, y));
    auto f = open_out(path);
    write_pfm_payload(f, "Pf", g.width, g.height, 1, buf);
}

DepthGrid read_pfm(const std::string& path) {
    auto f = open_in(path);
    int w, h;
    std::vector<float> buf = read_pfm_payload(f, "Pf", 1, w, h);
    DepthGrid g(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            g.at(x, y) = buf[size_t(h - 1 - y) * w + x];
    return g;
}

void write_pfm_normals(const std::string& path, const NormalGrid& g) {
    if (!host_little_endian())
        throw error("PFM writer assumes a little-endian host");
    std::vector<float> buf(g.size() * 3);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            size_t i = (size_t(g.height - 1 - y) * g.width + x) * 3;
            const Vec3& n = g.at(x, y);
            buf[i] = float(n.x);
            buf[i + 1] = float(n.y);
            buf[i + 2] = float(n.z);
        }
    auto f = open_out(path);
    write_pfm_payload(f, "PF", g.width, g.height, 3, buf);
}

NormalGrid read_pfm_normals(const std::string& path) {
    auto f = open_in(path);
    int w, h;
    std::vector<float> buf = read_pfm_payload(f, "PF", 3, w, h);
    NormalGrid g(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = (size_t(h - 1 - y) * w + x) * 3;
            g.at(x, y) = {buf[i], buf[i + 1], buf[i + 2]};
        }
    return g;
}

void write_pgm16_depth(const std::string& path, const DepthGrid& g) {
    auto f = open_out(path);
    f << "P5\n" << g.width << " " << g.height << "\n65535\n";
    for (double d : g.data) {
        long mm = std::lround(d * 1000.0);
        if (mm < 0)
            mm = 0;
        if (mm > 65535)
            mm = 65535;
        uint8_t hi = uint8_t(mm >> 8), lo = uint8_t(mm & 0xff);
        f.put(char(hi));
        f.put(char(lo));
    }
    if (!f)
        throw error("short PGM write");
}

DepthGrid read_pgm16_depth(const std::string& path) {
    auto f = open_in(path);
    if (next_token(f) != "P5")
        throw error("PGM magic mismatch");
    int w = parse_dim(next_token(f), "width");
    int h = parse_dim(next_token(f), "height");
    if (next_token(f) != "65535")
        throw error("PGM: expected 16-bit maxval 65535");
    f.get();
    std::vector<uint8_t> buf(size_t(w) * h * 2);
    f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (f.gcount() != std::streamsize(buf.size()))
        throw error("PGM payload truncated");
    DepthGrid g(w, h);
    for (size_t i = 0; i < g.size(); ++i)
        g.data[i] = double((unsigned(buf[2 * i]) << 8) | buf[2 * i + 1]) / 1000.0;
    return g;
}

void write_pgm_mask(const std::string& path, const MaskGrid& g) {
    auto f = open_out(path);
    f << "P5\n" << g.width << " " << g.height << "\n255\n";
    for (uint8_t m : g.data)
        f.put(m ? char(255) : char(0));
    if (!f)
        throw error("short PGM write");
}

MaskGrid read_pgm_mask(const std::string& path) {
    auto f = open_in(path);
    if (next_token(f) != "P5")
        throw error("PGM magic mismatch");
    int w = parse_dim(next_token(f), "width");
    int h = parse_dim(next_token(f), "height");
    if (next_token(f) != "255")
        throw error("PGM mask: expected maxval 255");
    f.get();
    std::vector<uint8_t> buf(size_t(w) * h);
    f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (f.gcount() != std::streamsize(buf.size()))
        throw error("PGM payload truncated");
    MaskGrid g(w, h);
    for (size_t i = 0; i < g.size(); ++i)
        g.data[i] = buf[i] ? 1 : 0;
    return g;
}

void write_ppm(const std::string& path, const ColorGrid& g) {
    auto f = open_out(path);
    f << "P6\n" << g.width << " " << g.height << "\n255\n";
    auto q = [](float v) {
        long b = std::lround(double(v) * 255.0);
        return char(b < 0 ? 0 : b > 255 ? 255 : b);
    };
    for (const Rgb& c : g.data) {
        f.put(q(c.r));
        f.put(q(c.g));
        f.put(q(c.b));
    }
    if (!f)
        throw error("short PPM write");
}

ColorGrid read_ppm(const std::string& path) {
    auto f = open_in(path);
    if (next_token(f) != "P6")
        throw error("PPM magic mismatch");
    int w = parse_dim(next_token(f), "width");
    int h = parse_dim(next_token(f), "height");
    if (next_token(f) != "255")
        throw error("PPM: expected maxval 255");
    f.get();
    std::vector<uint8_t> buf(size_t(w) * h * 3);
    f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (f.gcount() != std::streamsize(buf.size()))
        throw error("PPM payload truncated");
    ColorGrid g(w, h);
    for (size_t i = 0; i < g.size(); ++i)
        g.data[i] = {buf[3 * i] / 255.f, buf[3 * i + 1] / 255.f, buf[3 * i + 2] / 255.f};
    return g;
}

} // namespace sdprop
