#include "precode/fft.hpp"

#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace precode {

static Eigen::FFT<double>& engine() {
    thread_local Eigen::FFT<double> fft;
    return fft;
}

static void check_len(Eigen::Index m) {
    if (m < 2 || (m & (m - 1)) != 0)
        throw std::invalid_argument("centered_dft: length must be a power of two");
}

CVec centered_dft(const CVec& time) {
    const Eigen::Index m = time.size();
    check_len(m);
    std::vector<cplx> in(time.data(), time.data() + m), out(m);
    engine().fwd(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    CVec tones(m);
    for (Eigen::Index i = 0; i < m; ++i) tones(i) = out[(i + m / 2) % m] * scale;
    return tones;
}

CVec centered_idft(const CVec& tones) {
    const Eigen::Index m = tones.size();
    check_len(m);
    std::vector<cplx> in(m), out(m);
    for (Eigen::Index i = 0; i < m; ++i) in[(i + m / 2) % m] = tones(i);
    engine().inv(out, in);
    const double scale = std::sqrt(static_cast<double>(m));
    CVec time(m);
    for (Eigen::Index i = 0; i < m; ++i) time(i) = out[i] * scale;
    return time;
}

CMat centered_dft_rows(const CMat& time) {
    CMat tones(time.rows(), time.cols());
    for (Eigen::Index r = 0; r < time.rows(); ++r)
        tones.row(r) = centered_dft(time.row(r).transpose()).transpose();
    return tones;
}

CMat centered_idft_rows(const CMat& tones) {
    CMat time(tones.rows(), tones.cols());
    for (Eigen::Index r = 0; r < tones.rows(); ++r)
        time.row(r) = centered_idft(tones.row(r).transpose()).transpose();
    return time;
}

} // namespace precode
