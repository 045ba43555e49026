#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace cra {

/// Minimal fixed-schema CSV emitter: one header, uniform rows, '.' decimal
/// separator, '\n' line ends. Numbers print with 10 significant digits so
/// identical runs produce byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& names) {
        write_line(names);
        columns_ = names.size();
    }

    void row(const std::vector<std::string>& cells) {
        if (columns_ != 0 && cells.size() != columns_)
            throw std::logic_error("csv row arity differs from header");
        write_line(cells);
    }

    /// Trailing comment line; not part of the record schema.
    void footer(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }

    static std::string num(double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return buf;
    }

    static std::string num(long long v) { return std::to_string(v); }
    static std::string num(int v) { return std::to_string(v); }

private:
    void write_line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ostream& out_;
    std::size_t columns_ = 0;
};

}  // namespace cra
