#include "mpiv/mpi_io.h"

#include <filesystem>
#include <sstream>

#include "mpiv/image_io.h"
#include "mpiv/io_util.h"

namespace mpiv {

namespace {

namespace fs = std::filesystem;

std::string plane_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "plane_%03d.png", index);
  return buf;
}

}  // namespace

void save_mpi(const MultiplaneImage<float>& mpi, const std::string& dir) {
  detail::require(!mpi.planes.empty(), "save_mpi: empty MPI");
  fs::create_directories(dir);

  std::ostringstream meta;
  meta.precision(17);
  const Intrinsics& k = mpi.ref_camera.intrinsics;
  const Pose& pose = mpi.ref_camera.world_from_camera;
  meta << mpi.plane_count() << " " << mpi.height() << " " << mpi.width() << "\n";
  meta << mpi.depth_planes.near << " " << mpi.depth_planes.far << "\n";
  meta << k.fx << " " << k.fy << " " << k.cx << " " << k.cy << " " << k.width << " " << k.height
       << "\n";
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      meta << pose.rotation(row, col) << (row == 2 && col == 2 ? "\n" : " ");
  meta << pose.translation.x() << " " << pose.translation.y() << " " << pose.translation.z()
       << "\n";
  atomic_write_text((fs::path(dir) / "meta").string(), meta.str());

  for (int d = 0; d < mpi.plane_count(); ++d)
    write_png16_rgba((fs::path(dir) / plane_filename(d)).string(), mpi.planes[d].color,
                     mpi.planes[d].alpha);
}

MultiplaneImage<float> load_mpi(const std::string& dir) {
  std::istringstream meta(read_text_file((fs::path(dir) / "meta").string()));
  int d_count = 0;
  long height = 0, width = 0;
  double near = 0, far = 0;
  MultiplaneImage<float> mpi;
  Intrinsics& k = mpi.ref_camera.intrinsics;
  Pose& pose = mpi.ref_camera.world_from_camera;
  if (!(meta >> d_count >> height >> width >> near >> far >> k.fx >> k.fy >> k.cx >> k.cy >>
        k.width >> k.height))
    throw std::invalid_argument("load_mpi: malformed meta file in " + dir);
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      if (!(meta >> pose.rotation(row, col)))
        throw std::invalid_argument("load_mpi: malformed meta file in " + dir);
  if (!(meta >> pose.translation.x() >> pose.translation.y() >> pose.translation.z()))
    throw std::invalid_argument("load_mpi: malformed meta file in " + dir);
  detail::require(d_count >= 1, "load_mpi: bad plane count");
  k.validate();

  mpi.depth_planes = make_depth_planes(near, far, d_count);
  mpi.planes.resize(d_count);
  for (int d = 0; d < d_count; ++d) {
    ImageWithAlpha plane = read_image_rgba((fs::path(dir) / plane_filename(d)).string());
    detail::require(plane.color.height() == height && plane.color.width() == width,
                    "load_mpi: plane size does not match meta");
    mpi.planes[d].color = std::move(plane.color);
    mpi.planes[d].alpha = std::move(plane.alpha);
  }
  return mpi;
}

}  // namespace mpiv
