#pragma once

#include <string>
#include <vector>

namespace uq {

// Plain-text table: first column left-aligned, the rest right-aligned,
// two-space gutters, a dashed rule under the header.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> headers) : headers_(std::move(headers)) {}
    void add_row(std::vector<std::string> cells);
    std::string render() const;

private:
    std::vector<std::string> headers_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace uq
