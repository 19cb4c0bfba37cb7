import hashlib

import pytest

import geotools
from geotools import ToolContext
from geotools.gis import area_boundary, pois_within
from geotools.raster import get_bbox_from_geotiff
from models.bundle import GeoBundle, RasterGrid
from models.errors import (DomainError, EmptyLayer, IoFailure, MissingLayer, MissingMetadata,
                           NoBoundary, PathEscape, PlaceNotFound, SearchUnavailable, UnknownImage,
                           UnknownLabel, UnknownPoiQuery)
from models.utils import write_json


@pytest.fixture
def context(fixtures, tool_settings, tmp_path):
    return ToolContext(fixtures, tmp_path, tool_settings)


def run(context, executor_id, **args):
    return geotools.execute(executor_id, context, args)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestBoundary:
    def test_gazetteer_place(self, fixtures):
        bundle = area_boundary(fixtures, 'TestPark')
        assert bundle.vector('boundary')[0].coordinates == fixtures.place('TestPark')
        assert bundle.bbox == [13.4, 52.5, 13.42, 52.52]
        assert bundle.region == 'TestPark'

    def test_zero_buffer_is_identity(self, fixtures):
        plain = area_boundary(fixtures, 'TestPark')
        zero = area_boundary(fixtures, 'TestPark', buffer_m=0)
        assert zero.bbox == plain.bbox
        assert zero.vector('boundary')[0].coordinates == plain.vector('boundary')[0].coordinates

    def test_bbox_with_buffer(self, fixtures):
        bundle = area_boundary(fixtures, bbox=[0, 0, 1, 1], buffer_m=111320)
        assert bundle.bbox == pytest.approx([-1, -1, 2, 2], abs=1e-3)
        assert bundle.region == ''

    def test_unknown_place(self, fixtures):
        with pytest.raises(PlaceNotFound):
            area_boundary(fixtures, 'Atlantis')

    def test_executor_writes_bundle(self, context):
        value = run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        assert value == {'geopackage': 'park.gpkg', 'bbox': [13.4, 52.5, 13.42, 52.52], 'layer': 'boundary'}
        assert GeoBundle.load(context.bundle_path('park.gpkg')).layer_names() == ['boundary']


class TestPois:
    @pytest.fixture
    def park(self, context):
        run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        return context

    def test_kindergartens(self, park):
        assert run(park, 'add_pois_layer', geopackage='park.gpkg', query='kindergarten',
                   layer='kindergartens') == {'layer': 'kindergartens', 'count': 7}

    def test_edge_point_included(self, fixtures):
        names = [feature.properties['name'] for feature in
                 pois_within(area_boundary(fixtures, 'TestPark'), fixtures, 'kindergarten')]
        assert 'Kita Westtor' in names

    def test_empty_result_creates_layer(self, park):
        assert run(park, 'add_pois_layer', geopackage='park.gpkg', query='hospital',
                   layer='hospitals')['count'] == 0
        assert park.bundle('park.gpkg').vector('hospitals') == []

    def test_buffer_ring(self, context):
        run(context, 'get_area_boundary', geopackage='buffer.gpkg', place='TestPark', buffer_m=200)
        assert run(context, 'add_pois_layer', geopackage='buffer.gpkg', query='playground',
                   layer='playgrounds')['count'] == 4

    def test_unknown_query(self, park):
        with pytest.raises(UnknownPoiQuery):
            run(park, 'add_pois_layer', geopackage='park.gpkg', query='volcano', layer='v')

    def test_no_boundary(self, context):
        GeoBundle([0, 0, 1, 1]).save(context.bundle_path('bare.gpkg'))
        with pytest.raises(NoBoundary):
            run(context, 'add_pois_layer', geopackage='bare.gpkg', query='kindergarten', layer='k')

    def test_missing_bundle(self, context):
        with pytest.raises(IoFailure):
            run(context, 'add_pois_layer', geopackage='ghost.gpkg', query='kindergarten', layer='k')


class TestDistance:
    @pytest.fixture
    def park(self, context):
        run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        for query, layer in (('kindergarten', 'kindergartens'), ('bus_stop', 'bus_stops'),
                             ('hospital', 'hospitals')):
            run(context, 'add_pois_layer', geopackage='park.gpkg', query=query, layer=layer)
        return context

    def test_nearest_stops(self, park):
        value = run(park, 'compute_distance', geopackage='park.gpkg', source_layer='kindergartens',
                    target_layer='bus_stops')
        assert value['distances_m'] == pytest.approx([111.19] * 7, abs=0.01)
        assert value['links_layer'] == 'kindergartens_to_bus_stops'
        assert 'mean 111.2 m' in value['summary']
        links = park.bundle('park.gpkg').vector('kindergartens_to_bus_stops')
        assert [link.kind for link in links] == ['linestring'] * 7

    def test_identical_point(self, park):
        value = run(park, 'compute_distance', geopackage='park.gpkg', source_layer='kindergartens',
                    target_layer='kindergartens', links_layer='self')
        assert value['distances_m'] == [0.0] * 7

    def test_empty_layer(self, park):
        with pytest.raises(EmptyLayer):
            run(park, 'compute_distance', geopackage='park.gpkg', source_layer='kindergartens',
                target_layer='hospitals')

    def test_missing_layer(self, park):
        with pytest.raises(MissingLayer):
            run(park, 'compute_distance', geopackage='park.gpkg', source_layer='schools',
                target_layer='bus_stops')


class TestIndexLayers:
    def test_ndvi_trend(self, context):
        run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        before = run(context, 'add_index_layer', geopackage='park.gpkg', index_type='NDVI',
                     year=2018, layer='ndvi_2018')
        after = run(context, 'add_index_layer', geopackage='park.gpkg', index_type='NDVI',
                    year=2023, layer='ndvi_2023')
        assert before['stats']['mean'] == pytest.approx(0.5)
        assert after['stats']['mean'] == pytest.approx(0.41667, abs=1e-4)
        change = run(context, 'compute_index_change', geopackage='park.gpkg', index_type='NDVI',
                     earlier_layer='ndvi_2018', later_layer='ndvi_2023')
        assert change['stats']['mean'] == pytest.approx(-0.0833, abs=1e-4)
        shown = run(context, 'show_index_layer', geopackage='park.gpkg', index_type='NDVI',
                    layer=change['change_layer'])
        assert (context.workdir / shown['image_path']).stat().st_size > 0
        assert shown['classes']['loss']['pixels'] == 8
        assert shown['classes']['stable']['pixels'] == 8


class TestGeotiff:
    def test_fixture_matches_sidecar(self, fixtures):
        bundle = get_bbox_from_geotiff(fixtures.resolve('geotiffs/scene_a'))
        assert bundle.bbox == [10, 49, 11, 50]

    def test_linear_transform(self, tmp_path):
        write_json(tmp_path / 'meta.json', {'width': 100, 'height': 100, 'origin': [10, 50],
                                            'pixel_size': [0.01, -0.01]})
        assert get_bbox_from_geotiff(tmp_path).bbox == pytest.approx([10, 49, 11, 50])

    def test_single_pixel(self, tmp_path):
        write_json(tmp_path / 'meta.json', {'width': 1, 'height': 1, 'origin': [0, 1],
                                            'pixel_size': [0.5, -0.5]})
        assert get_bbox_from_geotiff(tmp_path).bbox == [0, 0.5, 0.5, 1]

    def test_missing_metadata(self, tmp_path):
        with pytest.raises(MissingMetadata):
            get_bbox_from_geotiff(tmp_path)
        write_json(tmp_path / 'meta.json', {'width': 4, 'origin': [0, 1]})
        with pytest.raises(MissingMetadata):
            get_bbox_from_geotiff(tmp_path)


class TestPerception:
    def test_count(self, context):
        assert run(context, 'count_given_object', image='images/apron_02.png', text='airplane') == {'count': 3}

    def test_count_in_region(self, context):
        assert run(context, 'count_given_object', image='images/quake_pre_09.png', text='building',
                   bbox=[0, 0, 400, 130])['count'] == 3

    def test_text_to_bbox(self, context):
        assert run(context, 'text_to_bbox', image='images/parking_07.png', text='car') == \
            {'bbox': [90, 80, 110, 120]}
        assert len(run(context, 'text_to_bbox', image='images/parking_07.png', text='Car ',
                       top1=False)['candidates']) == 2

    def test_detection_scores(self, context):
        objects = run(context, 'object_detection', image='images/apron_02.png')['objects']
        assert len(objects) == 4
        assert {item['score'] for item in objects} == {1.0}

    def test_segmentation(self, context):
        assert run(context, 'segment_object_pixels', image='images/apron_02.png', text='airplane',
                   flag=True)['pixels'] == 3600

    def test_ocr(self, context):
        assert 'MAX HEIGHT 4.2 M' in run(context, 'ocr', image='images/sign_03.png')['text']
        with pytest.raises(UnknownImage):
            run(context, 'ocr', image='images/nowhere.png')

    def test_unknown_label(self, context):
        with pytest.raises(UnknownLabel):
            run(context, 'count_given_object', image='images/apron_02.png', text='helicopter')

    def test_short_region(self, context):
        with pytest.raises(DomainError, match='4 values'):
            run(context, 'count_given_object', image='images/quake_pre_09.png', text='building', bbox=[1, 2])


class TestSearch:
    def test_offline(self, context):
        value = run(context, 'google_search', query='Boeing 737-800 wingspan', k=1)
        assert value['offline'] is True
        assert len(value['results']) == 1

    def test_live_without_endpoint(self, fixtures, tmp_path):
        context = ToolContext(fixtures, tmp_path, {'search': {'live': True, 'endpoint': ''}})
        with pytest.raises(SearchUnavailable):
            run(context, 'google_search', query='anything')


class TestRender:
    def test_same_call_same_bytes(self, context, fixtures, tmp_path):
        run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        run(context, 'add_pois_layer', geopackage='park.gpkg', query='kindergarten', layer='k')
        first = run(context, 'display_on_map', geopackage='park.gpkg', layers=['boundary', 'k'])
        path = context.workdir / first['image_path']
        assert path.stat().st_size > 0

        other = ToolContext(fixtures, tmp_path / 'other')
        other.commit('park.gpkg', context.bundle('park.gpkg'))
        second = run(other, 'display_on_map', geopackage='park.gpkg', layers=['boundary', 'k'])
        assert second['image_path'] == first['image_path']
        assert digest(other.workdir / second['image_path']) == digest(path)

    def test_missing_layer(self, context):
        run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        with pytest.raises(MissingLayer):
            run(context, 'display_on_map', geopackage='park.gpkg', layers=['nope'])

    def test_draw_box(self, context):
        value = run(context, 'draw_box', image='images/parking_07.png', bbox=[90, 80, 110, 120],
                    annotation='car')
        assert (context.workdir / value['image_path']).is_file()


class TestContainment:
    @pytest.mark.parametrize('ref', ['../outside.gpkg', 'a/../../outside.gpkg', '/tmp/outside.gpkg', '', '.'])
    def test_bundle_refs(self, context, ref):
        with pytest.raises(PathEscape):
            context.bundle_path(ref)

    def test_nested_ref_stays_inside(self, context):
        assert context.bundle_path('runs/../park.gpkg') == context.bundle_path('park.gpkg')

    def test_nothing_written_outside(self, fixtures, tool_settings, tmp_path):
        work = tmp_path / 'work'
        context = ToolContext(fixtures, work, tool_settings)
        with pytest.raises(PathEscape):
            run(context, 'get_area_boundary', geopackage='../outside.gpkg', place='TestPark')
        assert not (tmp_path / 'outside.gpkg').exists()

    def test_fixture_refs(self, fixtures):
        with pytest.raises(PathEscape):
            fixtures.resolve('../../etc/passwd')
        assert fixtures.resolve('geotiffs/scene_a').is_dir()

    @pytest.mark.parametrize('name', ['../x', 'a/b', '.hidden', '', 'x\n'])
    def test_layer_names(self, name):
        bundle = GeoBundle([0, 0, 1, 1])
        with pytest.raises(PathEscape):
            bundle.put_vector(name, [])
        with pytest.raises(PathEscape):
            bundle.put_raster(name, RasterGrid(1, 1, [0, 1], [1, -1], {'value': [0.5]}))

    def test_layer_name_through_executor(self, context):
        run(context, 'get_area_boundary', geopackage='park.gpkg', place='TestPark')
        with pytest.raises(PathEscape):
            run(context, 'add_pois_layer', geopackage='park.gpkg', query='kindergarten', layer='../kids')
        assert context.bundle('park.gpkg').layer_names() == ['boundary']
