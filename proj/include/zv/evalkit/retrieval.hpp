#pragma once

#include <vector>

#include "zv/tensor.hpp"

namespace zv::eval {

struct RetrievalResult {
    double ir_at_k = 0.0;  // image retrieval: rank of the true image per text
    double tr_at_k = 0.0;  // text retrieval: rank of the true text per image

    double mean() const { return 0.5 * (ir_at_k + tr_at_k); }
};

// sim[i][j] = similarity(image i, text j); diagonal entries are the
// positives. Ties rank the lower index first.
RetrievalResult retrieval_at_k(const std::vector<std::vector<double>>& sim, int k);
RetrievalResult retrieval_at_k(const Tensor& sim, int k);

}  // namespace zv::eval
