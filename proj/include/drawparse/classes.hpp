#pragma once

#include <string>
#include <string_view>

#include "drawparse/errors.hpp"

namespace drawparse {

// Stage-1 layout taxonomy.
enum class RegionClass { View = 0, TitleBlock = 1, Notes = 2 };

// Stage-2 annotation taxonomy.
enum class AnnotationClass { Measure = 0, Gdt = 1, Roughness = 2 };

// Patch kinds routed through stage 3 (union of the text-bearing regions and
// the annotation classes).
enum class RegionKind { TitleBlock, Notes, Measure, Gdt, Roughness };

inline constexpr int kNumRegionClasses = 3;
inline constexpr int kNumAnnotationClasses = 3;

std::string_view region_class_name(RegionClass c);
std::string_view annotation_class_name(AnnotationClass c);
std::string_view region_kind_name(RegionKind k);

RegionClass region_class_from_name(std::string_view name);
AnnotationClass annotation_class_from_name(std::string_view name);
RegionKind region_kind_from_name(std::string_view name);

RegionClass region_class_from_id(int id);
AnnotationClass annotation_class_from_id(int id);

}  // namespace drawparse
