#pragma once

// Minimal CSV emission for experiment outputs. Doubles are written with 17
// significant digits so that values round-trip exactly.

#include <pdrisk/types.hpp>

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

namespace pdrisk::csv {

inline std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format(std::string_view v) { return std::string(v); }
inline std::string format(const char *v) { return v; }
inline std::string format(const std::string &v) { return v; }

template <class Int>
    requires std::is_integral_v<Int>
std::string format(Int v) {
    return std::to_string(v);
}

class Writer {
  public:
    explicit Writer(std::initializer_list<std::string_view> columns)
        : columns_(columns.size()) {
        bool first = true;
        for (auto c : columns) {
            if (!first)
                text_ += ',';
            text_ += c;
            first = false;
        }
        text_ += '\n';
    }

    template <class... Ts> void row(const Ts &...fields) {
        static_assert(sizeof...(Ts) > 0);
        if (sizeof...(Ts) != columns_)
            throw std::logic_error("csv::Writer: row width does not match header");
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += format(fields), first = false), ...);
        text_ += '\n';
    }

    const std::string &str() const { return text_; }

  private:
    std::size_t columns_;
    std::string text_;
};

} // namespace pdrisk::csv
