import pytest

from siot_discovery.config import default_config
from siot_discovery.errors import GraphInvariantError, ParameterError
from siot_discovery.model import (
    ContactEvent,
    Cover,
    DeviceRecord,
    OwnerGraph,
    Partition,
    RelationKind,
    RequestMetadata,
    SocialGraph,
    TrustKind,
    TrustLevel,
    Visibility,
    check_cover,
    check_partition,
    check_social_graph,
    validate_device_table,
)


def record(device_id, device_type="smartphone", owner=0, visibility=Visibility.PRIVATE,
           position=(0.5, 0.5), caps=None):
    if caps is None:
        caps = default_config().capabilities.capability_map[device_type]
    return DeviceRecord(
        device_id=device_id,
        device_type=device_type,
        owner_id=owner,
        visibility=visibility,
        position=position,
        capabilities=caps,
    )


class TestValidateDeviceTable:
    def test_empty_table_accepted(self, default_cfg):
        report = validate_device_table([], default_cfg.capabilities)
        assert report.ok
        assert report.n_total == 0

    def test_duplicate_id_reported(self, default_cfg):
        table = [record(7), record(7, owner=1)]
        report = validate_device_table(table, default_cfg.capabilities)
        assert not report.ok
        assert any(f.kind == "duplicate-id" and f.device_id == 7 for f in report.findings)

    def test_position_out_of_range(self, default_cfg):
        report = validate_device_table(
            [record(1, position=(1.5, 0.2))], default_cfg.capabilities
        )
        assert any(f.kind == "position-out-of-range" for f in report.findings)

    def test_unknown_type_rejected(self, default_cfg):
        report = validate_device_table(
            [record(1, device_type="toaster", caps=frozenset())],
            default_cfg.capabilities,
        )
        assert any(f.kind == "unknown-type" for f in report.findings)

    def test_type_without_capabilities_reported(self, default_cfg):
        report = validate_device_table(
            [record(1, device_type="other", caps=frozenset())],
            default_cfg.capabilities,
        )
        assert any(f.kind == "no-capabilities" for f in report.findings)

    def test_counts(self, default_cfg):
        table = [
            record(1),
            record(2, visibility=Visibility.PUBLIC),
            record(3),
        ]
        report = validate_device_table(table, default_cfg.capabilities)
        assert (report.n_total, report.n_private, report.n_public) == (3, 2, 1)


class TestSocialGraph:
    def test_build_canonicalizes_orientation(self):
        g = SocialGraph.build(RelationKind.CLOR, [1, 2], [(2, 1, 0.5)])
        assert g.edges == ((1, 2, 0.5),)
        assert g.weight(1, 2) == g.weight(2, 1) == 0.5

    def test_self_loop_rejected(self):
        with pytest.raises(GraphInvariantError):
            SocialGraph.build(RelationKind.CLOR, [1], [(1, 1, 0.5)])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(GraphInvariantError):
            SocialGraph.build(RelationKind.CLOR, [1, 2], [(1, 2, 0.5), (2, 1, 0.4)])

    def test_weight_domain(self):
        with pytest.raises(GraphInvariantError):
            SocialGraph.build(RelationKind.CLOR, [1, 2], [(1, 2, 0.0)])
        with pytest.raises(GraphInvariantError):
            SocialGraph.build(RelationKind.CLOR, [1, 2], [(1, 2, 1.2)])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(GraphInvariantError):
            SocialGraph.build(RelationKind.CLOR, [1, 2], [(1, 3, 0.5)])

    def test_validity_assertion_passes_on_built_graph(self, two_triangles):
        check_social_graph(two_triangles)

    def test_degrees_and_total_weight(self, two_triangles):
        assert two_triangles.total_weight == pytest.approx(6.0)
        assert two_triangles.weighted_degrees[0] == pytest.approx(2.0)


class TestOwnerGraph:
    def test_dedupe_and_sort(self):
        g = OwnerGraph.build([0, 1, 2], [(1, 0), (0, 1), (2, 1)])
        assert g.edges == ((0, 1), (1, 2))
        assert g.adjacency[1] == frozenset({0, 2})

    def test_self_loop_rejected(self):
        with pytest.raises(GraphInvariantError):
            OwnerGraph.build([0], [(0, 0)])


class TestPartitionAndCover:
    def test_partition_total_check(self):
        p = Partition(RelationKind.CLOR, {0: 0, 1: 0, 2: 1})
        check_partition(p, [0, 1, 2])
        with pytest.raises(GraphInvariantError):
            check_partition(p, [0, 1, 2, 3])

    def test_partition_contiguous_ids(self):
        with pytest.raises(GraphInvariantError):
            check_partition(Partition(RelationKind.CLOR, {0: 0, 1: 2}), [0, 1])

    def test_cover_membership_and_homeless(self):
        cover = Cover(
            RelationKind.SFOR,
            communities=(frozenset({0, 1}), frozenset({1, 2})),
            scores=(0.01, 0.02),
            threshold=0.1,
        )
        assert cover.membership(1) == (0, 1)
        assert cover.homeless([0, 1, 2, 3]) == frozenset({3})
        assert cover.total_membership == 4
        check_cover(cover)

    def test_cover_threshold_check(self):
        bad = Cover(
            RelationKind.SFOR,
            communities=(frozenset({0, 1}),),
            scores=(0.5,),
            threshold=0.1,
        )
        with pytest.raises(GraphInvariantError):
            check_cover(bad)


class TestContactEvent:
    def test_rejects_backwards_interval(self):
        with pytest.raises(ParameterError):
            ContactEvent(1, 2, 100.0, 100.0)

    def test_rejects_self_meeting(self):
        with pytest.raises(ParameterError):
            ContactEvent(1, 1, 0.0, 60.0)

    def test_pair_is_ordered(self):
        assert ContactEvent(5, 3, 0.0, 60.0).pair == (3, 5)


class TestTrustLevel:
    def test_parse_round_trip(self):
        for text, kind in [("owner", TrustKind.OWNER), ("friend", TrustKind.FRIEND),
                           ("any", TrustKind.ANY)]:
            level = TrustLevel.parse(text)
            assert level.kind is kind
            assert str(level) == text

    def test_parse_fof(self):
        level = TrustLevel.parse("fof:3")
        assert level.kind is TrustKind.FRIEND_OF_FRIEND
        assert level.n_hops == 3
        assert level.min_weight == pytest.approx(1 / 3)
        assert TrustLevel.parse("friend-of-friend:2").n_hops == 2

    def test_fof_needs_two_hops(self):
        with pytest.raises(ParameterError):
            TrustLevel.parse("fof:1")

    def test_weight_floors(self):
        assert TrustLevel.parse("owner").min_weight == 1.0
        assert TrustLevel.parse("friend").min_weight == 0.75
        assert TrustLevel.parse("any").min_weight is None


class TestRequestMetadata:
    def test_position_must_be_normalized(self):
        with pytest.raises(ParameterError):
            RequestMetadata(1, (1.2, 0.0), TrustLevel.parse("any"))
