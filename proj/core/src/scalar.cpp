#include <walk/scalar.hpp>

#include <array>
#include <bit>
#include <chrono>
#include <charconv>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace walk {

auto to_string(StorageKind kind) -> std::string_view {
    switch (kind) {
        case StorageKind::Float64:
            return "float64";
        case StorageKind::Utf8:
            return "utf8";
        case StorageKind::Timestamp:
            return "timestamp";
    }
    return "unknown";
}

auto compare_scalars(const Scalar& lhs, const Scalar& rhs) -> std::strong_ordering {
    if (lhs.index() != rhs.index()) {
        return lhs.index() <=> rhs.index();
    }
    switch (lhs.index()) {
        case 0:
            return std::strong_ordering::equal;
        case 1: {
            double a = std::get<double>(lhs);
            double b = std::get<double>(rhs);
            if (a < b) {
                return std::strong_ordering::less;
            }
            if (b < a) {
                return std::strong_ordering::greater;
            }
            return std::strong_ordering::equal;
        }
        case 2:
            return std::get<std::string>(lhs).compare(std::get<std::string>(rhs)) <=> 0;
        default:
            return std::get<Timestamp>(lhs) <=> std::get<Timestamp>(rhs);
    }
}

auto scalars_identical(const Scalar& lhs, const Scalar& rhs) -> bool {
    if (lhs.index() != rhs.index()) {
        return false;
    }
    if (const auto* a = std::get_if<double>(&lhs)) {
        return std::bit_cast<std::uint64_t>(*a) == std::bit_cast<std::uint64_t>(std::get<double>(rhs));
    }
    return lhs == rhs;
}

auto parse_number(std::string_view text) -> std::optional<double> {
    if (text.empty()) {
        return std::nullopt;
    }
    std::size_t pos = 0;
    if (text[pos] == '-') {
        ++pos;
    }
    bool digits = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])) != 0) {
        ++pos;
        digits = true;
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])) != 0) {
            ++pos;
            digits = true;
        }
    }
    if (!digits) {
        return std::nullopt;
    }
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
        ++pos;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            ++pos;
        }
        bool exp_digits = false;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])) != 0) {
            ++pos;
            exp_digits = true;
        }
        if (!exp_digits) {
            return std::nullopt;
        }
    }
    if (pos != text.size()) {
        return std::nullopt;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    // "-0" becomes +0 so that bitwise key equality agrees with numeric equality.
    return value == 0.0 ? 0.0 : value;
}

auto format_number(double value) -> std::string {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) {
        return "0";
    }
    return std::string(buf.data(), ptr);
}

namespace {

auto parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, int& out) -> bool {
    if (pos + len > text.size()) {
        return false;
    }
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = text[i];
        if (c < '0' || c > '9') {
            return false;
        }
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

constexpr std::int64_t kMillisPerDay = 86'400'000;

}  // namespace

auto parse_iso_datetime(std::string_view text) -> std::optional<Timestamp> {
    if (text.size() != 10 && (text.size() < 19 || text.size() > 24)) {
        return std::nullopt;
    }
    int y = 0;
    int m = 0;
    int d = 0;
    if (!parse_fixed_int(text, 0, 4, y) || text[4] != '-' || !parse_fixed_int(text, 5, 2, m) ||
        text[7] != '-' || !parse_fixed_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    std::int64_t millis =
        static_cast<std::int64_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()) * kMillisPerDay;
    if (text.size() == 10) {
        return Timestamp{millis};
    }
    int hh = 0;
    int mm = 0;
    int ss = 0;
    if ((text[10] != 'T' && text[10] != ' ') || !parse_fixed_int(text, 11, 2, hh) || text[13] != ':' ||
        !parse_fixed_int(text, 14, 2, mm) || text[16] != ':' || !parse_fixed_int(text, 17, 2, ss)) {
        return std::nullopt;
    }
    std::string_view tail = text.substr(19);
    int frac = 0;
    if (!tail.empty() && tail.front() == '.') {
        if (!parse_fixed_int(tail, 1, 3, frac)) {
            return std::nullopt;
        }
        tail.remove_prefix(4);
    }
    if (tail == "Z") {
        tail.remove_prefix(1);
    }
    if (!tail.empty() || hh > 23 || mm > 59 || ss > 59) {
        return std::nullopt;
    }
    millis += (static_cast<std::int64_t>(hh) * 3600 + mm * 60 + ss) * 1000 + frac;
    return Timestamp{millis};
}

namespace {

struct CivilTime {
    int year;
    unsigned month;
    unsigned day;
    int hour;
    int minute;
    int second;
    int millis;
};

auto to_civil(Timestamp ts) -> CivilTime {
    std::int64_t days = ts.millis / kMillisPerDay;
    std::int64_t rem = ts.millis % kMillisPerDay;
    if (rem < 0) {
        rem += kMillisPerDay;
        --days;
    }
    std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    auto secs = rem / 1000;
    return CivilTime{static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()),
                     static_cast<int>(secs / 3600),
                     static_cast<int>((secs / 60) % 60),
                     static_cast<int>(secs % 60),
                     static_cast<int>(rem % 1000)};
}

auto format_civil(Timestamp ts, char separator, bool zulu) -> std::string {
    auto c = to_civil(ts);
    std::array<char, 40> buf{};
    int n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u%c%02d:%02d:%02d", c.year, c.month, c.day,
                          separator, c.hour, c.minute, c.second);
    std::string out(buf.data(), static_cast<std::size_t>(n));
    if (c.millis != 0) {
        std::snprintf(buf.data(), buf.size(), ".%03d", c.millis);
        out += buf.data();
    }
    if (zulu) {
        out.push_back('Z');
    }
    return out;
}

}  // namespace

auto format_iso_datetime(Timestamp ts) -> std::string {
    return format_civil(ts, 'T', true);
}

auto format_sql_datetime(Timestamp ts) -> std::string {
    return format_civil(ts, ' ', false);
}

auto scalar_to_text(const Scalar& value) -> std::string {
    switch (value.index()) {
        case 1:
            return format_number(std::get<double>(value));
        case 2:
            return std::get<std::string>(value);
        case 3:
            return format_iso_datetime(std::get<Timestamp>(value));
        default:
            return {};
    }
}

}  // namespace walk
