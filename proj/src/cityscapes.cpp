#include "edgeseg/cityscapes.hpp"

namespace edgeseg {
namespace cityscapes {

const std::array<const char*, 19> kClassNames = {
    "road",          "sidewalk",     "building", "wall",   "fence",
    "pole",          "traffic light", "traffic sign", "vegetation", "terrain",
    "sky",           "person",       "rider",    "car",    "truck",
    "bus",           "train",        "motorcycle", "bicycle",
};

const std::array<std::uint8_t, 19> kClassToCategory = {
    0, 0,           // road, sidewalk -> flat
    1, 1, 1,        // building, wall, fence -> construction
    2, 2, 2,        // pole, traffic light, traffic sign -> object
    3, 3,           // vegetation, terrain -> nature
    4,              // sky
    5, 5,           // person, rider -> human
    6, 6, 6, 6, 6, 6,  // car..bicycle -> vehicle
};

const std::array<const char*, 7> kCategoryNames = {
    "flat", "construction", "object", "nature", "sky", "human", "vehicle",
};

const std::array<std::array<std::uint8_t, 3>, 19> kPalette = {{
    {128, 64, 128},   // road
    {244, 35, 232},   // sidewalk
    {70, 70, 70},     // building
    {102, 102, 156},  // wall
    {190, 153, 153},  // fence
    {153, 153, 153},  // pole
    {250, 170, 30},   // traffic light
    {220, 220, 0},    // traffic sign
    {107, 142, 35},   // vegetation
    {152, 251, 152},  // terrain
    {70, 130, 180},   // sky
    {220, 20, 60},    // person
    {255, 0, 0},      // rider
    {0, 0, 142},      // car
    {0, 0, 70},       // truck
    {0, 60, 100},     // bus
    {0, 80, 100},     // train
    {0, 0, 230},      // motorcycle
    {119, 11, 32},    // bicycle
}};

const std::array<std::uint8_t, 4> kDefaultRareClasses = {3, 4, 15, 16};

}  // namespace cityscapes
}  // namespace edgeseg
