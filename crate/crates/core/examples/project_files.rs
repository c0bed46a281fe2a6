//! Save a workspace as a project file and load it back.

use tagdeck::demo;
use tagdeck::pipeline::Pipeline;
use tagdeck::project::{load_project, save_project, Project};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (mut board, assets) = demo::tesla_workspace()?;
    let pipeline = Pipeline::new(demo::replay_backend());
    let outline = pipeline.generate_outline(&mut board, &assets).await?;
    let deck = pipeline.generate_deck(&mut board, &assets, &outline.markdown).await?.deck;
    let project = Project {
        project_id: "tesla-demo".into(),
        board,
        outline: Some(outline),
        deck: Some(deck),
        assets,
        saved_at: 0,
    };
    let bytes = save_project(&project);
    let dir = std::env::temp_dir().join("tagdeck-project-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("tesla.tagdeck.json");
    std::fs::write(&path, &bytes)?;
    let (loaded, warnings) = load_project(&std::fs::read(&path)?)?;
    println!("{} bytes at {}", bytes.len(), path.display());
    println!("identical after reload: {}", loaded == project);
    println!("warnings: {warnings:?}");
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
