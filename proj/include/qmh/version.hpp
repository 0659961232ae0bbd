#ifndef QMH_VERSION_HPP
#define QMH_VERSION_HPP

#include <Eigen/Core>

#include <string>

namespace qmh {

inline constexpr const char* kVersion = "1.0.0";

/** Version of the Eigen headers the library was compiled against. */
inline std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." +
         std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

}  // namespace qmh

#endif  // QMH_VERSION_HPP
