#include "drawparse/classes.hpp"

namespace drawparse {

std::string_view region_class_name(RegionClass c) {
    switch (c) {
        case RegionClass::View: return "view";
        case RegionClass::TitleBlock: return "title_block";
        case RegionClass::Notes: return "notes";
    }
    throw ValidationError("invalid RegionClass value");
}

std::string_view annotation_class_name(AnnotationClass c) {
    switch (c) {
        case AnnotationClass::Measure: return "measure";
        case AnnotationClass::Gdt: return "gdt";
        case AnnotationClass::Roughness: return "roughness";
    }
    throw ValidationError("invalid AnnotationClass value");
}

std::string_view region_kind_name(RegionKind k) {
    switch (k) {
        case RegionKind::TitleBlock: return "title_block";
        case RegionKind::Notes: return "notes";
        case RegionKind::Measure: return "measure";
        case RegionKind::Gdt: return "gdt";
        case RegionKind::Roughness: return "roughness";
    }
    throw ValidationError("invalid RegionKind value");
}

RegionClass region_class_from_name(std::string_view name) {
    if (name == "view") return RegionClass::View;
    if (name == "title_block") return RegionClass::TitleBlock;
    if (name == "notes") return RegionClass::Notes;
    throw ValidationError("unknown region class '" + std::string(name) + "'");
}

AnnotationClass annotation_class_from_name(std::string_view name) {
    if (name == "measure") return AnnotationClass::Measure;
    if (name == "gdt") return AnnotationClass::Gdt;
    if (name == "roughness") return AnnotationClass::Roughness;
    throw ValidationError("unknown annotation class '" + std::string(name) + "'");
}

RegionKind region_kind_from_name(std::string_view name) {
    if (name == "title_block") return RegionKind::TitleBlock;
    if (name == "notes") return RegionKind::Notes;
    if (name == "measure") return RegionKind::Measure;
    if (name == "gdt") return RegionKind::Gdt;
    if (name == "roughness") return RegionKind::Roughness;
    throw ValidationError("unknown region kind '" + std::string(name) + "'");
}

RegionClass region_class_from_id(int id) {
    if (id < 0 || id >= kNumRegionClasses)
        throw ValidationError("class " + std::to_string(id) + " out of range");
    return static_cast<RegionClass>(id);
}

AnnotationClass annotation_class_from_id(int id) {
    if (id < 0 || id >= kNumAnnotationClasses)
        throw ValidationError("class " + std::to_string(id) + " out of range");
    return static_cast<AnnotationClass>(id);
}

}  // namespace drawparse
