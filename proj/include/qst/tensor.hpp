#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "qst/common.hpp"

namespace qst {

/// Dense row-major 32-bit float tensor of rank <= 3. Sequence tensors are
/// laid out channels x length; flattened tensors are rank 1.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    static Tensor zeros(std::vector<int> shp) {
        Tensor t;
        t.shape = std::move(shp);
        t.data.assign(static_cast<size_t>(numel_of(t.shape)), 0.0f);
        return t;
    }

    static int64_t numel_of(const std::vector<int>& shp) {
        int64_t n = 1;
        for (int d : shp) {
            if (d <= 0) throw Error("tensor dimensions must be positive");
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }

    float& at(int i) { return data[static_cast<size_t>(i)]; }
    float at(int i) const { return data[static_cast<size_t>(i)]; }
    float& at(int c, int i) { return data[static_cast<size_t>(c) * shape[1] + i]; }
    float at(int c, int i) const { return data[static_cast<size_t>(c) * shape[1] + i]; }
};

} // namespace qst
