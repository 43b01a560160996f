#include "cellmorph/errors.hpp"
#include "cellmorph/mask_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

namespace cellmorph {

namespace {

constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

struct Dtype {
    bool is_signed = false;
    int bytes = 0;
};

Dtype parse_descr(const std::string& descr) {
    if (descr.size() != 3) throw MaskFormatError("unsupported NPY dtype '" + descr + "'");
    const char order = descr[0];
    const char kind = descr[1];
    const int bytes = descr[2] - '0';
    if (kind != 'u' && kind != 'i') {
        throw MaskFormatError("NPY dtype '" + descr + "' is not an integer type");
    }
    if (bytes != 1 && bytes != 2 && bytes != 4) {
        throw MaskFormatError("unsupported NPY integer width in '" + descr + "'");
    }
    if (bytes > 1 && order != '<') {
        throw MaskFormatError("NPY dtype '" + descr + "' is not little-endian");
    }
    if (bytes == 1 && order != '|' && order != '<') {
        throw MaskFormatError("unsupported NPY byte order in '" + descr + "'");
    }
    return Dtype{kind == 'i', bytes};
}

std::string dict_value(const std::string& header, const std::string& key) {
    const std::regex re("'" + key + "'\\s*:\\s*('[^']*'|True|False|\\([^)]*\\))");
    std::smatch m;
    if (!std::regex_search(header, m, re)) {
        throw MaskFormatError("NPY header lacks '" + key + "'");
    }
    return m[1].str();
}

std::vector<long long> parse_shape(const std::string& tuple) {
    std::vector<long long> dims;
    std::string body = tuple.substr(1, tuple.size() - 2);
    std::replace(body.begin(), body.end(), ',', ' ');
    std::istringstream in(body);
    std::string tok;
    while (in >> tok) {
        try {
            std::size_t used = 0;
            const long long d = std::stoll(tok, &used);
            if (used != tok.size() || d < 0) throw std::invalid_argument(tok);
            dims.push_back(d);
        } catch (const std::exception&) {
            throw MaskFormatError("malformed NPY shape " + tuple);
        }
    }
    return dims;
}

}  // namespace

RawGrid parse_npy(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 10 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw MaskFormatError("missing NPY magic string");
    }
    const int major = bytes[6];
    const int minor = bytes[7];
    if (major != 1 || minor != 0) {
        throw MaskFormatError("unsupported NPY version " + std::to_string(major) + "." +
                              std::to_string(minor) + " (only 1.0 is accepted)");
    }
    const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
    if (bytes.size() < 10 + header_len) throw MaskFormatError("truncated NPY header");
    const std::string header(reinterpret_cast<const char*>(bytes.data()) + 10, header_len);

    std::string descr = dict_value(header, "descr");
    descr = descr.substr(1, descr.size() - 2);
    const Dtype dtype = parse_descr(descr);
    if (dict_value(header, "fortran_order") != "False") {
        throw MaskFormatError("Fortran-order NPY arrays are not supported; save with C order");
    }
    const auto shape = parse_shape(dict_value(header, "shape"));
    if (shape.size() != 2) {
        throw MaskFormatError("NPY label mask must be 2-D, got " + std::to_string(shape.size()) +
                              " dimensions");
    }
    if (shape[0] <= 0 || shape[1] <= 0 || shape[0] > (1 << 30) || shape[1] > (1 << 30)) {
        throw MaskFormatError("NPY label mask has invalid dimensions");
    }

    RawGrid grid;
    grid.height = static_cast<int>(shape[0]);
    grid.width = static_cast<int>(shape[1]);
    const std::size_t count = static_cast<std::size_t>(grid.width) * grid.height;
    const std::size_t offset = 10 + header_len;
    if (bytes.size() - offset < count * static_cast<std::size_t>(dtype.bytes)) {
        throw MaskFormatError("NPY payload shorter than its declared shape");
    }
    grid.values.resize(count);
    const std::uint8_t* p = bytes.data() + offset;
    for (std::size_t i = 0; i < count; ++i, p += dtype.bytes) {
        std::uint32_t raw = 0;
        for (int b = 0; b < dtype.bytes; ++b) raw |= static_cast<std::uint32_t>(p[b]) << (8 * b);
        if (dtype.is_signed) {
            const int shift = 32 - 8 * dtype.bytes;
            const auto value = static_cast<std::int32_t>(raw << shift) >> shift;
            if (value < 0) throw MaskFormatError("negative label value in NPY mask");
            raw = static_cast<std::uint32_t>(value);
        }
        grid.values[i] = raw;
    }
    return grid;
}

RawGrid read_npy_grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MaskFormatError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return parse_npy(bytes);
    } catch (const MaskFormatError& e) {
        throw MaskFormatError(path.string() + ": " + e.what());
    }
}

void save_label_npy(const LabelMask& mask, const std::filesystem::path& path) {
    std::string header = "{'descr': '<u4', 'fortran_order': False, 'shape': (" +
                         std::to_string(mask.height()) + ", " + std::to_string(mask.width()) +
                         "), }";
    // Pad so the payload starts on a 64-byte boundary; header ends with '\n'.
    const std::size_t unpadded = 10 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(kMagic), sizeof kMagic);
    const char version[2] = {1, 0};
    out.write(version, 2);
    const char len[2] = {static_cast<char>(header.size() & 0xFF),
                         static_cast<char>((header.size() >> 8) & 0xFF)};
    out.write(len, 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (Label v : mask.data()) {
        const char le[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                            static_cast<char>((v >> 16) & 0xFF),
                            static_cast<char>((v >> 24) & 0xFF)};
        out.write(le, 4);
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace cellmorph
