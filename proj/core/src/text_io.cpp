#include "lunaforge/text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lunaforge/error.hpp"

namespace lunaforge {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::io: return "io";
        case ErrorKind::malformed_header: return "malformed_header";
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::out_of_bounds: return "out_of_bounds";
        case ErrorKind::hole: return "hole";
        case ErrorKind::budget_exceeded: return "budget_exceeded";
        case ErrorKind::validation: return "validation";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) fail(ErrorKind::invalid_argument, "cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view text, std::string_view what) {
    text = trim(text);
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        fail(ErrorKind::malformed_header,
             "expected a number for '" + std::string(what) + "', got '" + std::string(text) + "'");
    }
    return value;
}

long long parse_int(std::string_view text, std::string_view what) {
    text = trim(text);
    long long value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        fail(ErrorKind::malformed_header,
             "expected an integer for '" + std::string(what) + "', got '" + std::string(text) + "'");
    }
    return value;
}

const std::string& KeyValueHeader::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) fail(ErrorKind::malformed_header, "header is missing key '" + key + "'");
    return it->second;
}

double KeyValueHeader::get_double(const std::string& key) const { return parse_double(get(key), key); }

long long KeyValueHeader::get_int(const std::string& key) const { return parse_int(get(key), key); }

std::string KeyValueHeader::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

KeyValueHeader KeyValueHeader::parse(std::string_view text) {
    KeyValueHeader header;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorKind::malformed_header, "header line " + std::to_string(line_no) + " has no '='");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            fail(ErrorKind::malformed_header, "header line " + std::to_string(line_no) + " has an empty key");
        }
        if (header.contains(key)) fail(ErrorKind::malformed_header, "duplicate header key '" + key + "'");
        header.entries_[key] = value;
    }
    return header;
}

KeyValueHeader KeyValueHeader::read(const std::filesystem::path& path) { return parse(read_file(path)); }

void KeyValueHeader::write(const std::filesystem::path& path) const { write_file(path, to_text()); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail(ErrorKind::io, "read error on '" + path.string() + "'");
    return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "write error on '" + path.string() + "'");
}

}  // namespace lunaforge
