#ifndef OCCSPOT_SCHEMA_HPP
#define OCCSPOT_SCHEMA_HPP

#include <array>
#include <string_view>

namespace occspot::schema {

// Default 15-class semantic schema. Index 0 is "empty".
inline constexpr int kNumClasses = 15;

enum Class : int {
  kEmpty = 0,
  kCar = 1,
  kPedestrian = 2,
  kCyclist = 3,
  kBicycle = 4,
  kMotorcycle = 5,
  kTruck = 6,
  kBus = 7,
  kBarrier = 8,
  kTrafficCone = 9,
  kPole = 10,
  kBuilding = 11,
  kVegetation = 12,
  kTerrain = 13,
  kSidewalk = 14,
  kRoad = 15,
};

inline constexpr std::array<std::string_view, kNumClasses + 1> kNames = {
    "empty",  "car",     "pedestrian",   "cyclist", "bicycle",  "motorcycle",
    "truck",  "bus",     "barrier",      "traffic_cone", "pole", "building",
    "vegetation", "terrain", "sidewalk", "road"};

inline constexpr std::array<int, 5> kForeground = {kCar, kPedestrian, kCyclist, kBicycle,
                                                   kMotorcycle};

/// Nominal box dimensions (length, width, height) in meters per class.
struct ClassTemplate {
  double length;
  double width;
  double height;
  double max_speed;  // m/s; 0 for classes that never move
};

inline constexpr std::array<ClassTemplate, kNumClasses + 1> kTemplates = {{
    {0.0, 0.0, 0.0, 0.0},     // empty
    {4.5, 1.9, 1.6, 8.0},     // car
    {0.7, 0.7, 1.8, 1.5},     // pedestrian
    {1.8, 0.7, 1.7, 5.0},     // cyclist
    {1.7, 0.6, 1.1, 0.0},     // bicycle (parked)
    {2.1, 0.8, 1.4, 8.0},     // motorcycle
    {8.0, 2.6, 3.2, 6.0},     // truck
    {11.0, 2.9, 3.4, 6.0},    // bus
    {2.0, 0.4, 1.0, 0.0},     // barrier
    {0.4, 0.4, 0.7, 0.0},     // traffic cone
    {0.3, 0.3, 4.0, 0.0},     // pole
    {8.0, 8.0, 6.0, 0.0},     // building
    {2.5, 2.5, 3.0, 0.0},     // vegetation
    {4.0, 4.0, 0.3, 0.0},     // terrain patch
    {6.0, 2.0, 0.2, 0.0},     // sidewalk slab
    {0.0, 0.0, 0.0, 0.0},     // road (ground plane)
}};

}  // namespace occspot::schema

#endif  // OCCSPOT_SCHEMA_HPP
