#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "sqz/error.hpp"

namespace sqz::detail {

namespace {

enum class Direction { forward, inverse };

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, Direction dir) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, dir);
        if (auto it = plans_.find(key); it != plans_.end())
            return it->second;

        std::vector<double> real(n);
        std::vector<std::complex<double>> cplx(n / 2 + 1);
        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan =
            dir == Direction::forward
                ? fftw_plan_dft_r2c_1d(len, real.data(),
                                       reinterpret_cast<fftw_complex*>(cplx.data()), flags)
                : fftw_plan_dft_c2r_1d(len, reinterpret_cast<fftw_complex*>(cplx.data()),
                                       real.data(), flags);
        if (plan == nullptr)
            throw Error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, Direction>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

} // namespace

void forward_real(std::span<const double> in, std::span<std::complex<double>> out) {
    if (out.size() != in.size() / 2 + 1)
        throw Error("forward_real: output size mismatch");
    fftw_plan plan = cache().get(in.size(), Direction::forward);
    // r2c does not modify its input.
    fftw_execute_dft_r2c(plan, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void inverse_real(std::span<std::complex<double>> in, std::span<double> out) {
    if (in.size() != out.size() / 2 + 1)
        throw Error("inverse_real: input size mismatch");
    fftw_plan plan = cache().get(out.size(), Direction::inverse);
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

} // namespace sqz::detail
