mod common;

use axum::http::{Method, StatusCode};
use common::*;
use serde_json::json;
use tagdeck::artifacts::render_deck;
use tagdeck::board::{GroupName, TagBoard};
use tagdeck::demo;
use tagdeck::ingest::AssetStore;
use tagdeck::pipeline::{apply_variation, Pipeline};
use tagdeck::project::{save_project, Project};
use tagdeck_server::{build_state, Cli};

fn pipeline() -> Pipeline {
    Pipeline::new(demo::replay_backend())
}

#[tokio::test]
async fn health_reports_modes() {
    let h = harness();
    let v = h.get("/api/v1/health").await.json();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["backend"], "replay");
    assert_eq!(v["imageSearch"], "mock");
}

#[tokio::test]
async fn unknown_things_are_not_found() {
    let h = harness();
    for uri in ["/api/v1/jobs/job-999", "/api/v1/boards/nope", "/api/v1/nowhere", "/elsewhere"] {
        let r = h.get(uri).await;
        assert_eq!(r.status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(r.json()["code"], "notFound");
    }
}

#[tokio::test]
async fn malformed_bodies_are_bad_input() {
    let h = harness();
    h.create_board(json!({"boardId": "b"})).await;
    let r = h
        .send(Method::POST, "/api/v1/boards/b/tags", &[("content-type", "application/json")], b"{oops".to_vec())
        .await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["code"], "badInput");
    let r = h.json(Method::POST, "/api/v1/boards", json!({"demo": "chess"})).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn tag_edits_match_in_process_board() {
    let h = harness();
    h.create_board(json!({"boardId": "b1"})).await;
    let mut local = TagBoard::new("b1");

    let r = h
        .json(Method::POST, "/api/v1/boards/b1/tags", json!({"label": "Topic", "value": "Tides", "group": "Narrative"}))
        .await;
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.etag().as_deref(), Some("\"1\""));
    let id = r.json()["tagIds"][0].as_str().unwrap().to_string();
    let p = local.inside_position(GroupName::Narrative, 0, 1);
    let lid = local.create_tag("Topic", "Tides", Some(GroupName::Narrative), p).unwrap().id.clone();
    assert_eq!(id, lid.0);

    let stale = h
        .json_if(Method::PATCH, &format!("/api/v1/boards/b1/tags/{id}"), "0", json!({"label": "Topic", "value": "Moons"}))
        .await;
    assert_eq!(stale.status, StatusCode::CONFLICT);
    assert_eq!(stale.json()["code"], "conflict");

    let r = h
        .json_if(Method::PATCH, &format!("/api/v1/boards/b1/tags/{id}"), "\"1\"", json!({"label": "Topic", "value": "Moons"}))
        .await;
    assert_eq!(r.status, StatusCode::OK);
    local.edit_tag(&lid, "Topic", "Moons").unwrap();

    let r = h
        .json(Method::POST, &format!("/api/v1/boards/b1/tags/{id}/move"), json!({"group": "VisualStyle"}))
        .await;
    assert_eq!(r.status, StatusCode::OK);
    let p = local.inside_position(GroupName::VisualStyle, 0, 1);
    local.move_tag(&lid, p, Some(GroupName::VisualStyle)).unwrap();

    let bad = h
        .json(
            Method::POST,
            &format!("/api/v1/boards/b1/tags/{id}/move"),
            json!({"group": "Narrative", "position": local.group(GroupName::VisualStyle).center}),
        )
        .await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);

    let r = h.send(Method::DELETE, &format!("/api/v1/boards/b1/tags/{id}"), &[], Vec::new()).await;
    assert_eq!(r.status, StatusCode::OK);
    local.delete_tag(&lid).unwrap();

    let remote = h.get("/api/v1/boards/b1").await;
    assert_eq!(remote.etag(), Some(format!("\"{}\"", local.revision())));
    assert_eq!(remote.json(), board_json(&local));

    let gone = h.send(Method::DELETE, &format!("/api/v1/boards/b1/tags/{id}"), &[], Vec::new()).await;
    assert_eq!(gone.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn grounding_from_text_matches_pipeline() {
    let h = harness();
    h.create_board(json!({"boardId": "mc"})).await;
    let r = h
        .json(Method::POST, "/api/v1/boards/mc/ground-from-text", json!({"text": demo::MARIE_CURIE}))
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let mut local = TagBoard::new("mc");
    pipeline().ground_from_text(&mut local, demo::MARIE_CURIE).await.unwrap();
    let remote = r.json()["board"].clone();
    assert_eq!(remote, board_json(&local));
    let audience = tag_id(&remote, "Audience");
    let tag = remote["tags"].as_array().unwrap().iter().find(|t| t["id"] == audience).unwrap();
    assert_eq!(tag["value"], "Teenagers");
    assert_eq!(tag["group"], "Narrative");

    let empty = h.json(Method::POST, "/api/v1/boards/mc/ground-from-text", json!({"text": "  "})).await;
    assert_eq!(empty.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn yoga_jobs_produce_the_pipeline_deck() {
    let h = harness();
    h.create_board(json!({"demo": "yoga"})).await;
    let job = h.run_job("/api/v1/boards/yoga/suggestions", None).await;
    assert_eq!(job["status"], "done");
    assert_eq!(job["applied"], true);
    let job = h.run_job("/api/v1/boards/yoga/outline", None).await;
    assert_eq!(job["status"], "done", "{job}");
    let job = h.run_job("/api/v1/boards/yoga/deck", None).await;
    assert_eq!(job["status"], "done", "{job}");
    let remote = h.get("/api/v1/boards/yoga/deck").await.json();

    let mut board = demo::yoga_board();
    let assets = AssetStore::new();
    let p = pipeline();
    p.request_suggestions(&mut board, &assets).await.unwrap();
    let outline = p.generate_outline(&mut board, &assets).await.unwrap();
    let deck = p.generate_deck(&mut board, &assets, &outline.markdown).await.unwrap();

    assert_eq!(remote["deck"], serde_json::to_value(&deck.deck).unwrap());
    assert_eq!(remote["violations"], json!([]));
    assert_eq!(h.get("/api/v1/boards/yoga").await.json(), board_json(&board));
    let html = h.get("/api/v1/boards/yoga/deck/html").await;
    assert_eq!(html.text(), tagdeck::artifacts::render_deck_annotated(&deck.deck, &deck.violations));

    let result = h.get(&format!("/api/v1/jobs/{}/result", job["jobId"].as_str().unwrap())).await.json();
    assert_eq!(result["stale"], false);
    assert_eq!(result["result"]["deck"], remote["deck"]);
}

#[tokio::test]
async fn lanes_are_exclusive_and_jobs_cancel() {
    let (h, gate) = gated();
    h.create_board(json!({"demo": "yoga"})).await;
    let first = h.post("/api/v1/boards/yoga/suggestions").await;
    assert_eq!(first.status, StatusCode::ACCEPTED);
    let id = first.json()["jobId"].as_str().unwrap().to_string();
    let busy = h.post("/api/v1/boards/yoga/suggestions").await;
    assert_eq!(busy.status, StatusCode::CONFLICT);
    let not_done = h.get(&format!("/api/v1/jobs/{id}/result")).await;
    assert_eq!(not_done.status, StatusCode::CONFLICT);
    // A different lane is free.
    assert_eq!(h.post("/api/v1/boards/yoga/outline").await.status, StatusCode::ACCEPTED);

    let c = h.post(&format!("/api/v1/jobs/{id}/cancel")).await.json();
    assert_eq!(c["cancelled"], true);
    assert_eq!(c["job"]["status"], "failed");
    assert_eq!(c["job"]["error"]["code"], "cancelled");
    let again = h.post(&format!("/api/v1/jobs/{id}/cancel")).await.json();
    assert_eq!(again["cancelled"], false);

    gate.add_permits(16);
    h.state.settle().await;
    let j = h.get(&format!("/api/v1/jobs/{id}")).await.json();
    assert_eq!(j["status"], "failed");
    let listed = h.get("/api/v1/jobs?boardId=yoga").await.json();
    assert_eq!(listed.as_array().unwrap().len(), 2);
    assert_eq!(h.post("/api/v1/boards/yoga/suggestions").await.status, StatusCode::ACCEPTED);
}

#[tokio::test]
async fn stale_results_wait_for_explicit_apply() {
    let (h, gate) = gated();
    let board = h.create_board(json!({"demo": "yoga"})).await;
    let r = h.post("/api/v1/boards/yoga/outline").await;
    let id = r.json()["jobId"].as_str().unwrap().to_string();
    let mood = tag_id(&board, "Mood");
    let r = h
        .json(Method::PATCH, &format!("/api/v1/boards/yoga/tags/{mood}"), json!({"label": "Mood", "value": "Playful"}))
        .await;
    assert_eq!(r.status, StatusCode::OK);
    gate.add_permits(4);
    h.state.settle().await;

    let j = h.get(&format!("/api/v1/jobs/{id}")).await.json();
    assert_eq!(j["status"], "done");
    assert_eq!(j["stale"], true);
    assert_eq!(j["applied"], false);
    assert_eq!(h.get("/api/v1/boards/yoga/outline").await.status, StatusCode::NOT_FOUND);

    let applied = h.post(&format!("/api/v1/jobs/{id}/apply")).await;
    assert_eq!(applied.status, StatusCode::OK, "{}", applied.text());
    let outline = h.get("/api/v1/boards/yoga/outline").await;
    assert_eq!(outline.status, StatusCode::OK);
    assert_eq!(h.post(&format!("/api/v1/jobs/{id}/apply")).await.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn outline_edits_check_outline_revision() {
    let h = harness();
    h.create_board(json!({"boardId": "o"})).await;
    let r = h
        .json_if(Method::PUT, "/api/v1/boards/o/outline", "0", json!({"markdown": "# Deck\n## One\n- a\n"}))
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let rev = r.etag().unwrap();
    let stale = h
        .json_if(Method::PUT, "/api/v1/boards/o/outline", "0", json!({"markdown": "# Deck\n## Two\n"}))
        .await;
    assert_eq!(stale.status, StatusCode::CONFLICT);
    let ok = h
        .json_if(Method::PUT, "/api/v1/boards/o/outline", &rev, json!({"markdown": "# Deck\n## Two\n"}))
        .await;
    assert_eq!(ok.status, StatusCode::OK);
    assert_eq!(h.get("/api/v1/boards/o").await.json()["outlineRef"], ok.json()["id"]);
}

#[tokio::test]
async fn slide_session_overlay_changes_one_slide() {
    let h = harness();
    h.create_board(json!({"demo": "kayaking"})).await;
    h.run_job("/api/v1/boards/kayaking/outline", None).await;
    h.run_job("/api/v1/boards/kayaking/deck", None).await;
    let before = h.get("/api/v1/boards/kayaking/deck").await.json()["deck"].clone();

    let missing = h.json(Method::POST, "/api/v1/boards/kayaking/slide-sessions", json!({"slideNumber": 99})).await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    let job = h
        .run_job("/api/v1/boards/kayaking/slide-sessions", Some(json!({"slideNumber": demo::KAYAKING_SESSION_SLIDE})))
        .await;
    assert_eq!(job["status"], "done", "{job}");
    let sessions = h.get("/api/v1/boards/kayaking/slide-sessions").await.json();
    let sid = sessions[0]["sessionId"].as_str().unwrap().to_string();
    let base = format!("/api/v1/boards/kayaking/slide-sessions/{sid}");
    let session = h.get(&base).await.json();
    let color = tag_id(&session["scopedBoard"], "Color");
    let r = h
        .json(Method::PATCH, &format!("{base}/tags/{color}"), json!({"label": "Color", "value": demo::COLOR_OVERRIDE}))
        .await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());

    let too_many = h.json(Method::POST, &format!("{base}/variations"), json!({"count": 7})).await;
    assert_eq!(too_many.status, StatusCode::BAD_REQUEST);
    let job = h.run_job(&format!("{base}/variations"), None).await;
    assert_eq!(job["status"], "done", "{job}");
    assert_eq!(h.get(&base).await.json()["status"], "variationsReady");

    let applied = h.json(Method::POST, &format!("{base}/apply"), json!({"variationIndex": 0})).await;
    assert_eq!(applied.status, StatusCode::OK, "{}", applied.text());
    let after = h.get("/api/v1/boards/kayaking/deck").await.json()["deck"].clone();
    let (a, b) = (before["slides"].as_array().unwrap(), after["slides"].as_array().unwrap());
    let changed: Vec<_> = a.iter().zip(b).filter(|(x, y)| x != y).map(|(x, _)| x["slideNumber"].clone()).collect();
    assert_eq!(changed, vec![json!(demo::KAYAKING_SESSION_SLIDE)]);
    assert_eq!(after["slides"][1]["theme"]["colors"]["secondary"], "#E63946");

    // Same result in process.
    let board = demo::kayaking_board();
    let assets = AssetStore::new();
    let p = pipeline();
    let outline = p.outline_reply(&board, &assets).await.unwrap();
    let deck = p.deck_reply(&board, &assets, &outline.markdown, None).await.unwrap().deck;
    let mut s = p.open_slide_session(&deck, demo::KAYAKING_SESSION_SLIDE).await.unwrap();
    demo::color_override(&mut s.scoped_board);
    p.generate_slide_variations(&mut s, &assets, 1).await.unwrap();
    let next = apply_variation(&deck, &s, 0).unwrap();
    assert_eq!(after["slides"], serde_json::to_value(&next.slides).unwrap());
}

async fn style_board_with_deck(h: &Harness) {
    let kayak = demo::kayaking_board();
    let assets = AssetStore::new();
    let p = pipeline();
    let outline = p.outline_reply(&kayak, &assets).await.unwrap();
    let deck = p.deck_reply(&kayak, &assets, &outline.markdown, None).await.unwrap().deck;
    let project = Project {
        project_id: "style".into(),
        board: demo::style_board(),
        outline: None,
        deck: Some(deck),
        assets,
        saved_at: 0,
    };
    let r = h.send(Method::POST, "/api/v1/projects", &[], save_project(&project)).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
}

#[tokio::test]
async fn previews_over_http() {
    let h = harness();
    style_board_with_deck(&h).await;
    let board = h.get("/api/v1/boards/style").await.json();
    let r = h.json(Method::POST, "/api/v1/boards/style/previews", json!({})).await;
    assert_eq!(r.json()["jobIds"].as_array().unwrap().len(), 6);

    let typo = tag_id(&board, "Typography");
    let slider = h.poll(&format!("/api/v1/boards/style/tags/{typo}/slider")).await;
    assert_eq!(slider["status"], "fresh", "{slider}");
    assert_eq!(slider["value"]["steps"].as_array().unwrap().len(), 5);
    assert_eq!(slider["value"]["leftValue"], "Modern");

    let colors = tag_id(&board, "ColorScheme");
    let alts = h.poll(&format!("/api/v1/boards/style/tags/{colors}/alternatives")).await;
    assert_eq!(alts["status"], "fresh");
    assert_eq!(alts["value"]["options"].as_array().unwrap().len(), 5);
    let pid = alts["value"]["previews"]["Teal and Coral"].as_str().unwrap();
    let html = h.get(&format!("/api/v1/boards/style/previews/{pid}/html")).await;
    assert!(html.text().contains("#0F4C5C"));

    let topic = tag_id(&board, "Topic");
    let failed = h.poll(&format!("/api/v1/boards/style/tags/{topic}/slider")).await;
    assert_eq!(failed["status"], "failed");

    let preview = h
        .json(Method::POST, &format!("/api/v1/boards/style/tags/{colors}/preview"), json!({"value": "Teal and Coral"}))
        .await;
    assert_eq!(preview.status, StatusCode::OK, "{}", preview.text());
    assert!(preview.json()["html"].as_str().unwrap().contains("#0F4C5C"));
    let committed = h
        .json(Method::POST, &format!("/api/v1/boards/style/tags/{typo}/slider/commit"), json!({"step": 4}))
        .await;
    assert_eq!(committed.status, StatusCode::OK, "{}", committed.text());
    let tags = committed.json()["board"]["tags"].clone();
    let t = tags.as_array().unwrap().iter().find(|t| t["id"] == typo.as_str()).unwrap();
    assert_eq!(t["value"], "Traditional");
    // The slider belonged to the old value.
    let gone = h.get(&format!("/api/v1/boards/style/tags/{typo}/slider")).await.json();
    assert_ne!(gone["status"], "fresh");

    let metrics = h.get("/api/v1/boards/style/previews/metrics").await.json();
    assert!(metrics["valueHits"].as_u64().unwrap() >= 1, "{metrics}");
}

#[tokio::test]
async fn uploads_build_the_template_workspace() {
    let h = harness();
    h.create_board(json!({"boardId": "tesla"})).await;
    h.json(Method::POST, "/api/v1/boards/tesla/tags", json!({"label": "Topic", "value": "Tesla company overview", "group": "Narrative"}))
        .await;
    let r = h
        .send(Method::POST, "/api/v1/boards/tesla/assets/documents?filename=Tesla.docx&group=ContentSources", &[], demo::TESLA_DOCX.to_vec())
        .await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    let doc = r.json();
    let doc_tag = doc["tagId"].as_str().unwrap().to_string();
    assert!(doc["asset"]["sections"].as_array().unwrap().len() >= 2);

    let bad = h
        .json(Method::PUT, &format!("/api/v1/boards/tesla/tags/{doc_tag}/selection"), json!({"sectionIds": ["s404"]}))
        .await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    let ok = h
        .json(Method::PUT, &format!("/api/v1/boards/tesla/tags/{doc_tag}/selection"), json!({"sectionIds": ["s2"]}))
        .await;
    assert_eq!(ok.status, StatusCode::OK, "{}", ok.text());

    let pptx = h
        .send(Method::POST, "/api/v1/boards/tesla/assets/templates?name=Deck", &[], b"PK\x03\x04rest".to_vec())
        .await;
    assert_eq!(pptx.status, StatusCode::BAD_REQUEST);
    let tpl = h
        .send(Method::POST, "/api/v1/boards/tesla/assets/templates?name=Ocean&group=ContentSources", &[], demo::OCEAN_TEMPLATE.to_vec())
        .await;
    assert_eq!(tpl.status, StatusCode::CREATED, "{}", tpl.text());
    assert_eq!(h.get("/api/v1/boards/tesla/assets").await.json().as_array().unwrap().len(), 2);

    h.run_job("/api/v1/boards/tesla/outline", None).await;
    let job = h.run_job("/api/v1/boards/tesla/deck", None).await;
    assert_eq!(job["status"], "done", "{job}");
    let remote = h.get("/api/v1/boards/tesla/deck").await.json();

    let (mut board, assets) = demo::tesla_workspace().unwrap();
    let p = pipeline();
    let outline = p.generate_outline(&mut board, &assets).await.unwrap();
    let deck = p.generate_deck(&mut board, &assets, &outline.markdown).await.unwrap();
    assert_eq!(remote["deck"], serde_json::to_value(&deck.deck).unwrap());
    assert!(render_deck(&deck.deck).contains("templates.example.org/ocean"));
}

#[tokio::test]
async fn uploaded_images_are_served_back() {
    let h = harness();
    h.create_board(json!({"boardId": "img"})).await;
    let slides = tagdeck::artifacts::slides_from_json(&serde_json::from_slice(demo::OCEAN_TEMPLATE).unwrap()).unwrap();
    let png = tagdeck::pipeline::Rasterizer::rasterize(&tagdeck::pipeline::BlockRasterizer::default(), &slides[0]).unwrap();
    let r = h.send(Method::POST, "/api/v1/boards/img/assets/images?group=ContentSources", &[], png.clone()).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    let v = r.json();
    let url = v["asset"]["url"].as_str().unwrap();
    let path = url.trim_start_matches("http://127.0.0.1:8080");
    let blob = h.get(path).await;
    assert_eq!(blob.status, StatusCode::OK);
    assert_eq!(blob.headers["content-type"], "image/png");
    assert_eq!(blob.bytes, png);
    let junk = h.send(Method::POST, "/api/v1/boards/img/assets/images", &[], b"not an image".to_vec()).await;
    assert_eq!(junk.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn image_suggestions_add_floating_tags() {
    let h = harness();
    h.create_board(json!({"demo": "kayaking"})).await;
    let job = h.run_job("/api/v1/boards/kayaking/image-suggestions", None).await;
    assert_eq!(job["status"], "done");
    assert_eq!(job["result"]["assets"].as_array().unwrap().len(), 5);
    assert_eq!(job["result"]["query"], "Beginners Kayaking");
    let board = h.get("/api/v1/boards/kayaking").await.json();
    let added: Vec<_> = job["result"]["assets"].as_array().unwrap().iter().map(|a| a["assetId"].clone()).collect();
    let floating: Vec<_> = board["tags"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| added.contains(&t["source"]))
        .collect();
    assert_eq!(floating.len(), 5);
    assert!(floating.iter().all(|t| t["group"].is_null() && t["kind"] == "image"));

    let off = harness_no_search();
    off.create_board(json!({"demo": "kayaking"})).await;
    let job = off.run_job("/api/v1/boards/kayaking/image-suggestions", None).await;
    assert_eq!(job["status"], "done");
    assert!(job["result"]["warning"].as_str().unwrap().contains("disabled"));
    assert_eq!(job["result"]["assets"], json!([]));
}

#[tokio::test]
async fn projects_round_trip() {
    let h = harness();
    h.create_board(json!({"demo": "tesla"})).await;
    h.run_job("/api/v1/boards/tesla/outline", None).await;
    h.run_job("/api/v1/boards/tesla/deck", None).await;
    let exported = h.get("/api/v1/boards/tesla/project").await;
    assert_eq!(exported.status, StatusCode::OK);

    let clash = h.send(Method::POST, "/api/v1/projects", &[], exported.bytes.clone()).await;
    assert_eq!(clash.status, StatusCode::CONFLICT);
    let loaded = h.send(Method::POST, "/api/v1/projects?replace=true", &[], exported.bytes.clone()).await;
    assert_eq!(loaded.status, StatusCode::CREATED, "{}", loaded.text());
    assert_eq!(loaded.json()["warnings"], json!([]));
    let again = h.get("/api/v1/boards/tesla/project").await;
    let strip = |b: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(b).unwrap();
        v.as_object_mut().unwrap().remove("savedAt");
        v
    };
    assert_eq!(strip(&again.bytes), strip(&exported.bytes));

    let mut broken = strip(&exported.bytes);
    broken["assets"] = json!({"assets": {}});
    broken["savedAt"] = json!(0);
    let r = h.send(Method::POST, "/api/v1/projects?replace=true", &[], serde_json::to_vec(&broken).unwrap()).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", r.text());
    assert!(!r.json()["warnings"].as_array().unwrap().is_empty());

    let mut future = strip(&exported.bytes);
    future["schemaVersion"] = json!(99);
    future["savedAt"] = json!(0);
    let r = h.send(Method::POST, "/api/v1/projects", &[], serde_json::to_vec(&future).unwrap()).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);

    assert_eq!(h.post("/api/v1/boards/tesla/project").await.status, StatusCode::NOT_IMPLEMENTED);
}

#[tokio::test]
async fn projects_save_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = tagdeck_server::ServiceConfig {
        projects_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let h = harness_with(demo::replay_backend(), std::sync::Arc::new(demo::mock_image_search()), config);
    h.create_board(json!({"demo": "yoga"})).await;
    let r = h.post("/api/v1/boards/yoga/project").await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text());
    let bytes = std::fs::read(dir.path().join("yoga.json")).unwrap();
    let (project, warnings) = tagdeck::project::load_project(&bytes).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(board_json(&project.board), board_json(&demo::yoga_board()));
}

#[test]
fn startup_error_names_the_key_variable() {
    use clap::Parser;
    let cli = Cli::parse_from(["tagdeck-serve", "--backend", "live", "--api-key-env", "TAGDECK_TEST_MISSING_KEY"]);
    let err = build_state(&cli).err().expect("no key set");
    assert!(err.to_string().contains("TAGDECK_TEST_MISSING_KEY"), "{err}");
}
