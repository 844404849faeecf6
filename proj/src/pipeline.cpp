#include "tubelink/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "tubelink/errors.hpp"
#include "tubelink/linker.hpp"

namespace tubelink {

std::vector<std::vector<ActionTube>> link_videos(std::span<const VideoProposals> videos,
                                                 const RunSettings& settings) {
  settings.validate();
  std::vector<std::vector<ActionTube>> results(videos.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= videos.size()) return;
      try {
        results[i] = link_video(videos[i], linker_for(settings, videos[i].class_names));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  const std::size_t n = std::min<std::size_t>(std::size_t(settings.threads), videos.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

void prune_video_by_actionness(VideoProposals& video, std::span<const FlowMagnitudeMap> flow, double threshold) {
  for (const auto& map : flow) {
    if (map.frame < 1 || map.frame > video.frame_count()) {
      throw ValidationError("flow map for frame " + std::to_string(map.frame) + " outside video '" +
                            video.video_id + "'");
    }
    if (map.width != video.frame_width || map.height != video.frame_height) {
      throw ValidationError("flow map size differs from video '" + video.video_id + "'");
    }
    auto& frame = video.frames[std::size_t(map.frame - 1)];
    frame = prune_by_actionness(frame, map, threshold);
  }
}

}  // namespace tubelink
