#include "mfseg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mfseg {

namespace {

std::string payload_path(const std::string& sidecar_path) {
    if (sidecar_path.size() < 5 || sidecar_path.substr(sidecar_path.size() - 5) != ".json")
        throw IoError("sidecar path must end in .json: " + sidecar_path);
    return sidecar_path.substr(0, sidecar_path.size() - 5) + ".raw";
}

std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw IoError("read failure on " + path);
    return data;
}

void write_file(const std::string& path, const char* data, size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(data, static_cast<std::streamsize>(size));
    if (!out.good()) throw IoError("write failure on " + path);
}

float f32_from_le(const unsigned char* p) {
    uint32_t u = static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
                 static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

void f32_to_le(float f, unsigned char* p) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    p[0] = static_cast<unsigned char>(u & 0xff);
    p[1] = static_cast<unsigned char>((u >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((u >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

RasterStack load_sidecar(const std::string& path, bool allow_nan) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!j.is_object()) throw IoError(path + ": sidecar must be a JSON object");
    static const char* required[] = {"width", "height", "dtype", "byte_order", "bands"};
    for (const char* key : required)
        if (!j.contains(key)) throw IoError(path + ": sidecar missing key '" + key + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool known = std::any_of(std::begin(required), std::end(required),
                                       [&](const char* k) { return it.key() == k; });
        if (!known) throw IoError(path + ": unknown sidecar key '" + it.key() + "'");
    }
    if (j["dtype"] != "f32") throw IoError(path + ": unsupported dtype");
    if (j["byte_order"] != "LE") throw IoError(path + ": unsupported byte order");
    const int width = j["width"].get<int>();
    const int height = j["height"].get<int>();
    if (width < 1 || height < 1) throw IoError(path + ": bad dimensions");
    std::vector<std::string> names = j["bands"].get<std::vector<std::string>>();
    if (names.empty()) throw IoError(path + ": no bands");
    for (size_t i = 0; i < names.size(); ++i)
        for (size_t k = i + 1; k < names.size(); ++k)
            if (names[i] == names[k]) throw IoError(path + ": duplicate band name " + names[i]);

    const std::vector<char> payload = read_file(payload_path(path));
    const size_t pixels = static_cast<size_t>(width) * height;
    const size_t expected = pixels * names.size() * 4;
    if (payload.size() != expected) {
        std::ostringstream msg;
        msg << path << ": payload size mismatch, expected " << expected << " bytes, found "
            << payload.size();
        throw IoError(msg.str());
    }

    RasterStack stack;
    const unsigned char* p = reinterpret_cast<const unsigned char*>(payload.data());
    for (size_t b = 0; b < names.size(); ++b) {
        RasterBand band;
        band.width = width;
        band.height = height;
        band.name = names[b];
        band.values.resize(pixels);
        for (size_t i = 0; i < pixels; ++i) {
            const float f = f32_from_le(p + (b * pixels + i) * 4);
            if (!std::isfinite(f) && !(allow_nan && std::isnan(f)))
                throw IoError(path + ": non-finite value in band " + band.name);
            band.values[i] = static_cast<double>(f);
        }
        stack.bands.push_back(std::move(band));
    }
    return stack;
}

RasterStack load_pgm(const std::string& path) {
    const std::vector<char> data = read_file(path);
    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
        throw IoError(path + ": unsupported magic");

    size_t pos = 2;
    auto next_token = [&]() -> long {
        // whitespace and '#' comment lines may separate header fields
        while (pos < data.size()) {
            if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        if (pos >= data.size() || !std::isdigit(static_cast<unsigned char>(data[pos])))
            throw IoError(path + ": malformed PGM header");
        long v = 0;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
            v = v * 10 + (data[pos] - '0');
            ++pos;
        }
        return v;
    };

    const long width = next_token();
    const long height = next_token();
    const long maxval = next_token();
    if (width < 1 || height < 1) throw IoError(path + ": bad PGM dimensions");
    if (maxval != 255 && maxval != 65535) throw IoError(path + ": unsupported PGM maxval");
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
        throw IoError(path + ": malformed PGM header");
    ++pos;  // single whitespace byte before the payload

    const size_t pixels = static_cast<size_t>(width) * height;
    const size_t sample_bytes = maxval == 255 ? 1 : 2;
    if (data.size() - pos != pixels * sample_bytes)
        throw IoError(path + ": PGM payload size mismatch");

    RasterBand band;
    band.width = static_cast<int>(width);
    band.height = static_cast<int>(height);
    band.name = "gray";
    band.values.resize(pixels);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data()) + pos;
    if (sample_bytes == 1) {
        for (size_t i = 0; i < pixels; ++i) band.values[i] = static_cast<double>(p[i]);
    } else {
        for (size_t i = 0; i < pixels; ++i)
            band.values[i] = static_cast<double>((static_cast<unsigned>(p[2 * i]) << 8) |
                                                 p[2 * i + 1]);  // 16-bit samples big-endian
    }
    RasterStack stack;
    stack.bands.push_back(std::move(band));
    return stack;
}

bool looks_like_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    return magic[0] == 'P' && magic[1] == '5';
}

}  // namespace

const RasterBand& RasterStack::band(const std::string& name) const {
    for (const auto& b : bands)
        if (b.name == name) return b;
    throw std::invalid_argument("no band named " + name);
}

RasterStack load_raster(const std::string& path) {
    if (looks_like_pgm(path)) return load_pgm(path);
    return load_sidecar(path, /*allow_nan=*/false);
}

RasterStack load_raster_allow_nan(const std::string& path) {
    return load_sidecar(path, /*allow_nan=*/true);
}

void save_raster(const RasterStack& stack, const std::string& sidecar_path,
                 bool allow_non_finite) {
    if (stack.bands.empty()) throw std::invalid_argument("empty stack");
    const int width = stack.width();
    const int height = stack.height();
    for (const auto& b : stack.bands) {
        if (b.width != width || b.height != height)
            throw std::invalid_argument("bands differ in size");
        if (b.values.size() != b.pixel_count())
            throw std::invalid_argument("band value count does not match dimensions");
    }
    for (size_t i = 0; i < stack.bands.size(); ++i)
        for (size_t k = i + 1; k < stack.bands.size(); ++k)
            if (stack.bands[i].name == stack.bands[k].name)
                throw std::invalid_argument("duplicate band name " + stack.bands[i].name);

    nlohmann::ordered_json j;
    j["width"] = width;
    j["height"] = height;
    j["dtype"] = "f32";
    j["byte_order"] = "LE";
    std::vector<std::string> names;
    for (const auto& b : stack.bands) names.push_back(b.name);
    j["bands"] = names;
    const std::string text = j.dump() + "\n";
    write_file(sidecar_path, text.data(), text.size());

    const size_t pixels = static_cast<size_t>(width) * height;
    std::vector<unsigned char> payload(pixels * stack.bands.size() * 4);
    for (size_t b = 0; b < stack.bands.size(); ++b) {
        const auto& values = stack.bands[b].values;
        for (size_t i = 0; i < pixels; ++i) {
            const double v = values[i];
            if (!std::isfinite(v) && !allow_non_finite)
                throw std::invalid_argument("non-finite value in band " + stack.bands[b].name);
            f32_to_le(static_cast<float>(v), payload.data() + (b * pixels + i) * 4);
        }
    }
    write_file(payload_path(sidecar_path), reinterpret_cast<const char*>(payload.data()),
               payload.size());
}

RasterBand calibrate(const RasterBand& band, double gain, double offset) {
    if (gain == 0.0) throw std::invalid_argument("calibration gain must be nonzero");
    RasterBand out = band;
    for (double& v : out.values) {
        v = gain * v + offset;
        if (v < 0.0) v = 0.0;
    }
    return out;
}

RasterStack extract_window(const RasterStack& stack, const AnalysisWindow& w) {
    if (stack.bands.empty()) throw std::invalid_argument("empty stack");
    if (w.core_size < 1 || w.pad < 0) throw std::invalid_argument("bad analysis window");
    const int x0 = w.core_x - w.pad;
    const int y0 = w.core_y - w.pad;
    const int side = w.core_size + 2 * w.pad;
    if (x0 < 0 || y0 < 0 || x0 + side > stack.width() || y0 + side > stack.height())
        throw std::invalid_argument("analysis window exceeds raster bounds");

    RasterStack out;
    for (const auto& band : stack.bands) {
        RasterBand sub;
        sub.width = side;
        sub.height = side;
        sub.name = band.name;
        sub.values.resize(static_cast<size_t>(side) * side);
        for (int y = 0; y < side; ++y) {
            const double* src = band.values.data() + static_cast<size_t>(y0 + y) * band.width + x0;
            std::copy(src, src + side, sub.values.data() + static_cast<size_t>(y) * side);
        }
        out.bands.push_back(std::move(sub));
    }
    return out;
}

void save_mask(const SegmentationMask& mask, const std::string& path) {
    if (mask.width < 1 || mask.height < 1) throw std::invalid_argument("empty mask");
    std::ostringstream header;
    header << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    std::string out = header.str();
    const size_t head = out.size();
    out.resize(head + mask.pixel_count());
    for (size_t i = 0; i < mask.pixel_count(); ++i)
        out[head + i] = mask.water[i] ? static_cast<char>(255) : static_cast<char>(0);
    write_file(path, out.data(), out.size());
}

SegmentationMask load_mask(const std::string& path) {
    RasterStack stack = load_pgm(path);
    const RasterBand& band = stack.bands.front();
    SegmentationMask mask;
    mask.width = band.width;
    mask.height = band.height;
    mask.water.resize(band.pixel_count());
    for (size_t i = 0; i < band.values.size(); ++i) mask.water[i] = band.values[i] > 0.0 ? 1 : 0;
    return mask;
}

namespace {
// values below half the printed resolution would render as "-0.00000000"
double snap_zero(double v) { return std::abs(v) < 0.5e-8 ? 0.0 : v; }
}  // namespace

void save_spectrum_csv(const SpectrumCurve& curve, const std::string& path) {
    std::string out = "alpha,f,count\n";
    char line[96];
    for (const auto& p : curve.points) {
        std::snprintf(line, sizeof line, "%.8f,%.8f,%lld\n", snap_zero(p.alpha),
                      snap_zero(p.f), p.count);
        out += line;
    }
    write_file(path, out.data(), out.size());
}

SpectrumCurve load_spectrum_csv(const std::string& path, SpectrumCurve::Kind kind) {
    const std::vector<char> data = read_file(path);
    std::istringstream in(std::string(data.begin(), data.end()));
    std::string line;
    if (!std::getline(in, line) || line != "alpha,f,count")
        throw IoError(path + ": bad spectrum CSV header");
    SpectrumCurve curve;
    curve.kind = kind;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        SpectrumPoint p;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lld", &p.alpha, &p.f, &p.count) != 3)
            throw IoError(path + ": bad spectrum CSV row: " + line);
        curve.points.push_back(p);
    }
    return curve;
}

}  // namespace mfseg
